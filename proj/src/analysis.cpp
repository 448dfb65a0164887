#include "dnff/analysis.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>

#include "dnff/extxyz.hpp"

namespace dnff {

SpeciesPair parse_species_pair(const std::string& text, const SpeciesTable& names) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) throw InvalidInput("species pair '" + text + "' must look like A-B");
  return {species_id(names, text.substr(0, dash)), species_id(names, text.substr(dash + 1))};
}

std::string pair_label(SpeciesPair pair, const SpeciesTable& names) {
  auto name = [&](Species s) {
    return s < names.size() ? names[s] : std::to_string(static_cast<int>(s));
  };
  return name(pair.a) + "-" + name(pair.b);
}

RdfHistogram compute_rdf(const std::vector<LabeledFrame>& frames, SpeciesPair pair, double r_max,
                         std::size_t n_bins, const SpeciesTable& names) {
  if (frames.empty()) throw InvalidArgument("compute_rdf: no frames");
  if (n_bins == 0 || !(r_max > 0.0)) throw InvalidArgument("compute_rdf: need r_max > 0 and bins > 0");

  RdfHistogram h;
  h.pair = pair;
  h.label = pair_label(pair, names.empty() ? frames.front().config.names : names);
  h.r_max = r_max;
  h.n_bins = n_bins;
  h.counts.assign(n_bins, 0.0);
  h.g.assign(n_bins, 0.0);
  h.centers.resize(n_bins);
  const double width = r_max / static_cast<double>(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) h.centers[k] = (k + 0.5) * width;

  const bool same = pair.a == pair.b;
  std::vector<double> norm_sum(n_bins, 0.0);
  for (const auto& frame : frames) {
    const auto& c = frame.config;
    if (r_max > 0.5 * c.box.min_length() * (1.0 + 1e-12)) {
      throw InvalidArgument("compute_rdf: r_max exceeds half the smallest box length");
    }
    std::vector<std::size_t> ia, ib;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c.species[i] == pair.a) ia.push_back(i);
      if (c.species[i] == pair.b) ib.push_back(i);
    }
    const double volume = c.box.volume();
    const double na = static_cast<double>(ia.size());
    const double nb = static_cast<double>(ib.size());
    const double pairs = same ? 0.5 * na * (na - 1.0) : na * nb;
    for (std::size_t p = 0; p < ia.size(); ++p) {
      const std::size_t i = ia[p];
      for (std::size_t q = 0; q < ib.size(); ++q) {
        const std::size_t j = ib[q];
        if (same && j <= i) continue;
        const double r = minimum_image(c.positions[i], c.positions[j], c.box).norm();
        if (r >= r_max) continue;
        const auto k = std::min(n_bins - 1, static_cast<std::size_t>(r / width));
        h.counts[k] += 1.0;
      }
    }
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double lo = k * width;
      const double hi = lo + width;
      const double shell = 4.0 / 3.0 * std::numbers::pi * (hi * hi * hi - lo * lo * lo);
      norm_sum[k] += pairs / volume * shell;
    }
    h.count_a = ia.size();
    h.count_b = ib.size();
    h.volume = volume;
  }
  h.n_frames = frames.size();
  for (std::size_t k = 0; k < n_bins; ++k) {
    h.g[k] = norm_sum[k] > 0.0 ? h.counts[k] / norm_sum[k] : 0.0;
  }
  return h;
}

namespace {

void require_same_binning(const RdfHistogram& a, const RdfHistogram& b) {
  if (a.n_bins != b.n_bins || a.r_max != b.r_max) {
    throw InvalidInput("RDF binning mismatch (" + std::to_string(a.n_bins) + " bins to " +
                       std::to_string(a.r_max) + " vs " + std::to_string(b.n_bins) + " bins to " +
                       std::to_string(b.r_max) + ")");
  }
}

}  // namespace

RdfDistance rdf_distance(const RdfHistogram& g1, const RdfHistogram& g2, double r_min,
                         double r_max) {
  require_same_binning(g1, g2);
  RdfDistance d;
  std::size_t used = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < g1.n_bins; ++k) {
    const double r = g1.centers[k];
    if (r < r_min || r > r_max) continue;
    const double diff = std::abs(g1.g[k] - g2.g[k]);
    sum += diff * diff;
    d.linf = std::max(d.linf, diff);
    ++used;
  }
  if (used == 0) throw InvalidInput("rdf_distance: no bins in the requested range");
  d.l2 = std::sqrt(sum / static_cast<double>(used));
  return d;
}

Instability detect_instability(const RdfHistogram& g, const RdfHistogram& reference, double r_lo,
                               double r_hi, double threshold) {
  require_same_binning(g, reference);
  Instability out;
  bool any = false;
  std::size_t arg = 0;
  for (std::size_t k = 0; k < g.n_bins; ++k) {
    const double r = g.centers[k];
    if (r < r_lo || r > r_hi) continue;
    const double excess = g.g[k] - reference.g[k];
    if (!any || excess > out.peak_excess) {
      out.peak_excess = excess;
      arg = k;
      any = true;
    }
  }
  if (!any) throw InvalidInput("detect_instability: window contains no bins");
  out.flag = out.peak_excess > threshold && reference.g[arg] < kEmptyReference;
  return out;
}

void write_rdf_csv(std::ostream& out, const RdfHistogram& rdf) {
  out << "pair,r,g,counts\n";
  for (std::size_t k = 0; k < rdf.n_bins; ++k) {
    out << rdf.label << ',' << format_double(rdf.centers[k]) << ',' << format_double(rdf.g[k])
        << ',' << format_double(rdf.counts[k]) << '\n';
  }
}

void write_rdf_csv_file(const std::filesystem::path& path, const RdfHistogram& rdf) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
  write_rdf_csv(out, rdf);
}

}  // namespace dnff
