#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dnff/core.hpp"

namespace dnff {

struct SpeciesPair {
  Species a = 0;
  Species b = 0;
};

// "Li-Cl" -> ids through the species table.
SpeciesPair parse_species_pair(const std::string& text, const SpeciesTable& names);
std::string pair_label(SpeciesPair pair, const SpeciesTable& names);

struct RdfHistogram {
  SpeciesPair pair;
  std::string label;
  double r_max = 0.0;
  std::size_t n_bins = 0;
  std::vector<double> centers;
  std::vector<double> g;
  std::vector<double> counts;  // raw pair counts summed over frames
  std::size_t n_frames = 0;
  std::size_t count_a = 0;
  std::size_t count_b = 0;
  double volume = 0.0;

  double bin_width() const { return r_max / static_cast<double>(n_bins); }
};

// g(bin) = <pairs in shell> / (ideal pair density * shell volume), averaged over
// frames. For a == b unordered pairs are counted against N_a (N_a - 1) / (2V).
RdfHistogram compute_rdf(const std::vector<LabeledFrame>& frames, SpeciesPair pair, double r_max,
                         std::size_t n_bins, const SpeciesTable& names = {});

struct RdfDistance {
  double l2 = 0.0;
  double linf = 0.0;
};

// Metrics over bins whose centers lie in [r_min, r_max].
RdfDistance rdf_distance(const RdfHistogram& g1, const RdfHistogram& g2, double r_min,
                         double r_max);

struct Instability {
  bool flag = false;
  double peak_excess = 0.0;
};

inline constexpr double kSpikeThreshold = 1.0;
inline constexpr double kEmptyReference = 0.2;

// Largest excess of g over the reference in the window; flagged only where the
// reference is essentially empty (< 0.2) at the arg-max bin.
Instability detect_instability(const RdfHistogram& g, const RdfHistogram& reference, double r_lo,
                               double r_hi, double threshold = kSpikeThreshold);

// CSV with header `pair,r,g,counts`.
void write_rdf_csv(std::ostream& out, const RdfHistogram& rdf);
void write_rdf_csv_file(const std::filesystem::path& path, const RdfHistogram& rdf);

}  // namespace dnff
