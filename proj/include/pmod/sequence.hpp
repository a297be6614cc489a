#pragma once

// Deciding whether a finite, decreasing capacity-like sequence a_n tends to
// zero. The verdict reads the growth of R_n = a_n^{-1/(p-1)}, which adds
// like resistance for capacities in series: R_n has a finite limit exactly
// when a_n has a positive one. With s = dR/d(ln n) ~ C n^sigma, sigma < 0
// means R converges (a power approach to a positive limit), sigma = 0 is the
// logarithmic borderline and sigma > 0 power growth. Model fits in a_n and
// Aitken extrapolation are reported alongside as evidence.

#include <optional>
#include <string>
#include <vector>

namespace pmod {

enum class Verdict
{
    hyperbolic,
    parabolic,
    inconclusive,
};

const char* to_string(Verdict v);

struct Thresholds
{
    /// Limit estimates at or above this count as positive.
    double delta_hyp = 1e-3;
    /// Limit estimates at or below this count as zero.
    double delta_par = 1e-6;
    /// Growth exponents sigma <= -slope_hyp count as convergent R_n.
    double slope_hyp = 0.15;
    /// Growth exponents sigma >= -slope_par count as divergent R_n.
    double slope_par = 0.05;
    /// Relative increments of R_n below this are solver noise.
    double noise_floor = 1e-7;
    /// Fewest points for a model-based verdict.
    int min_points = 5;
};

struct ModelFit
{
    std::string name;    // short id, e.g. "power_offset"
    std::string formula; // human-readable
    std::vector<double> params;
    /// Root-mean-square relative residual.
    double rms;
    double limit;
    /// true: a∞ > 0 is allowed (a + c n^-b, a + c e^-ln); false: limit zero.
    bool positive_class;
};

struct SequenceAnalysis
{
    Verdict verdict = Verdict::inconclusive;
    /// Limit estimate: from the extrapolated R_n when it converges, else 0.
    double limit = 0.0;
    /// Tail growth exponent sigma of dR/d(ln n); -inf once R_n has stopped
    /// moving above the noise floor, nullopt when it cannot be estimated.
    std::optional<double> growth_exponent;
    /// Last value of R_n and its extrapolated limit (inf when divergent).
    double resistance = 0.0;
    double resistance_limit = 0.0;
    std::optional<double> aitken;
    std::vector<ModelFit> fits;
    double best_positive_rms = 0.0;
    double best_zero_rms = 0.0;
    bool monotone = true;
    std::vector<std::string> notes;

    const ModelFit* fit(const std::string& name) const;
};

/// `n` strictly increasing and positive, a >= 0; p is the exponent the
/// values are capacities for. Monotonicity is checked up to `monotone_tol`
/// relative.
SequenceAnalysis analyze_sequence(const std::vector<double>& n,
                                  const std::vector<double>& a,
                                  double p,
                                  const Thresholds& thresholds = {},
                                  double monotone_tol = 1e-6);

/// Aitken Δ² on three consecutive values; nullopt when the second
/// difference vanishes.
std::optional<double> aitken(double a0, double a1, double a2);

} // namespace pmod
