#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dav/box.hpp"
#include "dav/damap.hpp"

namespace dav {

/// Conditional-measure estimate on one center-leaf segment of a foliated
/// box: normalized bin masses over the leaf parameter [-L, L].
struct ConditionalHistogram {
  int cell = -1;
  int bins = 0;
  std::vector<double> mass;   // sums to 1 unless the cell is empty
  std::int64_t raw_count = 0;
  bool empty = true;
};

/// Deterministic volume sampling of a box: sample i comes from the stream
/// (seed, "box_sampling", i). Returns the leaf coordinates of the in-box
/// samples (empty optional = sample fell outside).
std::vector<std::optional<LeafCoordinates>> sample_box(const FoliatedBox& box,
                                                       std::int64_t samples,
                                                       std::uint64_t seed, int workers = 0);

/// Histogram the leaf parameters of in-box volume samples per transversal
/// cell. Throws InsufficientSamples when some cell has fewer than
/// min_cell_count samples.
std::vector<ConditionalHistogram> estimate_conditionals(const FoliatedBox& box,
                                                        std::int64_t samples, int bins,
                                                        std::uint64_t seed,
                                                        int min_cell_count = 100,
                                                        int workers = 0);

/// Merge adjacent bin pairs: the exact coarse-graining of a 2B-bin
/// histogram to B bins.
ConditionalHistogram merge_bins(const ConditionalHistogram& h);

enum class Verdict { LebesgueLike, AtomicLike, SingularContinuousLike, Inconclusive };
const char* verdict_name(Verdict v);

struct ClassifierThresholds {
  double atom_mass = 0.5;          // max-bin mass that still counts as an atom
  double ks_family_alpha = 0.05;   // 95% family confidence, Bonferroni over cells
};

struct LevelStats {
  int bins = 0;
  double ks_mean = 0.0;
  double ks_max = 0.0;
  double ks_critical = 0.0;   // per-cell threshold used for the uniformity gate
  bool uniform_pass = false;  // every cell under the critical value
  double max_bin_mean = 0.0;
  double max_bin_max = 0.0;
  double top1_mass = 0.0;     // mean over cells of the largest 1% of bins
  double top5_mass = 0.0;
};

struct DisintegrationReport {
  std::vector<LevelStats> levels;
  Verdict verdict = Verdict::Inconclusive;
  ClassifierThresholds thresholds;
};

/// Pure function of the recorded statistics and thresholds:
///  LEBESGUE_LIKE            uniformity holds at every level,
///  ATOMIC_LIKE              mean max-bin mass stays above the atom
///                           threshold as bins refine,
///  SINGULAR_CONTINUOUS_LIKE non-uniform at every level while the max-bin
///                           mass decays with refinement,
///  INCONCLUSIVE             anything else.
DisintegrationReport classify_disintegration(
    const std::vector<std::vector<ConditionalHistogram>>& per_level,
    const ClassifierThresholds& thresholds = {});

/// Kolmogorov-Smirnov distance of a histogram to the uniform law on its
/// support (max CDF deviation over bin edges).
double ks_to_uniform(const ConditionalHistogram& h);

/// 95%-style KS critical value coeff/sqrt(n) with Bonferroni adjustment.
double ks_critical_value(std::int64_t count, int cells, double family_alpha);

/// Volume fraction of points whose leaf carries conditional mass >= 0.6 on
/// the length-L window around them (window slid to stay inside the leaf).
struct ConcentrationProfile {
  std::vector<double> window_lengths;
  std::vector<double> volume_fraction;
  std::vector<double> standard_error;
  double mass_threshold = 0.6;
};

ConcentrationProfile concentration_profile(const FoliatedBox& box, std::int64_t samples,
                                           const std::vector<double>& window_lengths,
                                           std::uint64_t seed, double mass_threshold = 0.6,
                                           int workers = 0);

/// Same computation on externally supplied per-cell histograms and sample
/// parameters; lets exact fixtures exercise the window arithmetic.
double window_mass(const ConditionalHistogram& h, double leaf_half_length, double center,
                   double window_length);

/// Equidistribution diagnostic: max deviation of orbit averages of
/// low-frequency characters from their volume integrals (zero).
struct BirkhoffReport {
  TorusPoint base;
  std::int64_t orbit_length = 0;
  int dictionary_size = 0;
  double discrepancy = 0.0;
  std::vector<double> per_character;
  bool non_generic = false;  // discrepancy so large the orbit cannot be typical
};

BirkhoffReport birkhoff_discrepancy(const DAMap& f, const TorusPoint& x, std::int64_t n,
                                    int dictionary_size);

/// The integer frequency dictionary used by birkhoff_discrepancy, ordered
/// by sup-norm shells then lexicographically; excludes 0.
std::vector<Eigen::Vector3i> birkhoff_dictionary(int size);

// --- scaled leaf measures m_{xi,k} -------------------------------------------

/// The measure m_{xi,k}: the center-leaf segment from xi to q_k(xi) with
/// assigned mass lambda^k, lambda the modulus of the center eigenvalue of
/// the linearization. q_k is the point whose k-fold preimage sits at center
/// arclength gamma0 from the k-fold preimage of xi, i.e. the crossing of
/// the center leaf of xi with the k-th forward image of the base surface.
struct MkMeasure {
  TorusPoint base;
  int level = 0;
  double mass = 1.0;
  double length = 0.0;
  std::vector<Vec3> segment;  // lift polyline from xi to q_k
};

/// Shared state for the m_{xi,k} construction: the fixed point of f, the
/// su-reference patch through it, the center field, and the validated
/// gamma0. Construction checks that gamma0-segments change length
/// monotonically under iteration (the usable-k precheck).
class MkConstruction {
 public:
  MkConstruction(const DAMap& f, const FoliationBundles& bundles, double gamma0,
                 int k_max = 8, double curve_step = 1e-3);

  const DAMap& map() const { return *f_; }
  double gamma0() const { return gamma0_; }
  double lambda() const { return lambda_; }
  int k_max() const { return k_max_; }
  const TorusPoint& fixed_point() const { return fixed_point_; }

  /// Base points for scans: grid of an su-patch through the fixed point.
  std::vector<TorusPoint> reference_points(int per_side, double half_size) const;

  MkMeasure build(const TorusPoint& xi, int k) const;

 private:
  const DAMap* f_;
  const FoliationBundles* bundles_;
  double gamma0_;
  double lambda_;
  int k_max_;
  double curve_step_;
  TorusPoint fixed_point_;
};

struct MkScanRow {
  int xi_index = 0;
  int level = 0;
  double mass = 0.0;
  double length = 0.0;
  double ratio = 0.0;  // lambda^k / length
};

struct MkScan {
  std::vector<MkScanRow> rows;
  double beta = 0.0;         // max over rows of max(ratio, 1/ratio)
  double trend_slope = 0.0;  // OLS slope of ratio against k
  double trend_se = 0.0;     // standard error of the slope
  bool trend_significant = false;  // |slope| > 3 se
};

MkScan mk_length_ratio_scan(const MkConstruction& mk, const std::vector<TorusPoint>& xis,
                            int k_max);

/// Center exponent recovered from leaf-segment length growth: every step
/// pushes a fresh short center segment through f and accumulates the log
/// stretch; (1/n) sum converges to the center Lyapunov exponent.
double center_exponent_from_mk(const DAMap& f, const FoliationBundles& bundles,
                               const TorusPoint& x, int n, double segment_length = 1e-3,
                               double step = 1e-4);

}  // namespace dav
