#include "dnff/checkpoint.hpp"

#include <fstream>
#include <json.hpp>

#include "dnff/potentials.hpp"

namespace dnff {

using nlohmann::json;

void write_checkpoint(std::ostream& out, const ModelParameters& params) {
  params.validate();
  const auto& hyper = params.hyper();
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["hyper"] = {{"n_rbf", hyper.n_rbf},
                  {"r_cut", hyper.r_cut},
                  {"n_species", hyper.n_species},
                  {"hidden_sizes", hyper.hidden_sizes},
                  {"activation", "tanh"}};
  doc["rbf_centers"] = params.rbf_centers();
  doc["rbf_width"] = params.rbf_width();
  doc["species"] = params.species();
  doc["training_sigma"] = params.training_sigma;
  doc["best_validation_loss"] = params.best_validation_loss;

  json pairs = json::array();
  const auto& theta = params.values();
  for (Species a = 0; a < hyper.n_species; ++a) {
    for (Species b = a; b < hyper.n_species; ++b) {
      const std::size_t base = params.block_offset(a, b);
      json layers = json::array();
      for (const auto& s : params.layers()) {
        const double* w = theta.data() + base + s.weight_offset;
        const double* bias = theta.data() + base + s.bias_offset;
        layers.push_back({{"shape", {s.rows, s.cols}},
                          {"weights", std::vector<double>(w, w + s.rows * s.cols)},
                          {"bias", std::vector<double>(bias, bias + s.rows)}});
      }
      pairs.push_back({{"pair", params.species()[a] + "-" + params.species()[b]},
                       {"layers", std::move(layers)}});
    }
  }
  doc["pairs"] = std::move(pairs);
  out << doc.dump(1) << '\n';
}

void write_checkpoint_file(const std::filesystem::path& path, const ModelParameters& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
  write_checkpoint(out, params);
}

ModelParameters read_checkpoint(std::istream& in) {
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("checkpoint: malformed JSON: ") + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw InvalidInput("checkpoint: unsupported format_version");
    }
    const auto& h = doc.at("hyper");
    if (h.at("activation").get<std::string>() != "tanh") {
      throw InvalidInput("checkpoint: only tanh activations are supported");
    }
    ModelHyper hyper;
    hyper.n_rbf = h.at("n_rbf").get<std::size_t>();
    hyper.r_cut = h.at("r_cut").get<double>();
    hyper.n_species = h.at("n_species").get<std::size_t>();
    hyper.hidden_sizes = h.at("hidden_sizes").get<std::vector<std::size_t>>();
    ModelParameters params(hyper, doc.at("species").get<SpeciesTable>());

    if (doc.at("rbf_centers").get<std::vector<double>>() != params.rbf_centers() ||
        doc.at("rbf_width").get<double>() != params.rbf_width()) {
      throw InvalidInput("checkpoint: radial basis layout does not match hyperparameters");
    }
    params.training_sigma = doc.at("training_sigma").get<double>();
    params.best_validation_loss = doc.at("best_validation_loss").get<double>();

    const auto& pairs = doc.at("pairs");
    if (pairs.size() != params.n_pairs()) throw InvalidInput("checkpoint: wrong number of pairs");
    auto& theta = params.values();
    for (const auto& entry : pairs) {
      const std::string label = entry.at("pair").get<std::string>();
      const auto dash = label.find('-');
      if (dash == std::string::npos) throw InvalidInput("checkpoint: bad pair label " + label);
      const Species a = species_id(params.species(), label.substr(0, dash));
      const Species b = species_id(params.species(), label.substr(dash + 1));
      const std::size_t base = params.block_offset(a, b);
      const auto& layers = entry.at("layers");
      if (layers.size() != params.layers().size()) {
        throw InvalidInput("checkpoint: wrong layer count for " + label);
      }
      for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& s = params.layers()[l];
        const auto shape = layers[l].at("shape").get<std::vector<std::size_t>>();
        const auto w = layers[l].at("weights").get<std::vector<double>>();
        const auto bias = layers[l].at("bias").get<std::vector<double>>();
        if (shape != std::vector<std::size_t>{s.rows, s.cols} || w.size() != s.rows * s.cols ||
            bias.size() != s.rows) {
          throw InvalidInput("checkpoint: layer " + std::to_string(l) + " of " + label +
                             " has the wrong shape");
        }
        std::copy(w.begin(), w.end(), theta.data() + base + s.weight_offset);
        std::copy(bias.begin(), bias.end(), theta.data() + base + s.bias_offset);
      }
    }
    params.validate();
    return params;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("checkpoint: ") + e.what());
  }
}

ModelParameters read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  try {
    return read_checkpoint(in);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

}  // namespace dnff
