#pragma once

#include <string>
#include <vector>

#include "berger/curvature_model.hpp"
#include "berger/geodesic_flow.hpp"

namespace berger {

/// Covariant derivatives x^(1), ..., x^(p_max) of the projected curve at one
/// parameter value. vectors[0] is x' = u.
struct DerivativeChain {
    double at_sigma = 0.0;
    std::vector<FrameVector> vectors;
};

inline constexpr double kDefaultRankTol = 1e-10;
inline constexpr double kDefaultConstancyTol = 1e-6;
inline constexpr double kDefaultVanishingTol = 1e-7;

/**
 * x^(p) = (-script_R)^(p-1) u for a unit-bundle state, where the twisted
 * operator is constant along the curve. TM states are refused with NotParallel;
 * states off the unit bundle by more than 1e-6 throw ConstraintViolation.
 */
[[nodiscard]] DerivativeChain algebraic_chain(const BundleState& state, const SpaceFormModel& model,
                                              const BergerParams& params, int p_max,
                                              Bundle bundle = Bundle::T1M);

/// Central finite differences (second order) of the sampled u around
/// center_index. Samples must be uniformly spaced in sigma.
[[nodiscard]] DerivativeChain numeric_chain(const Trajectory& traj, std::size_t center_index,
                                            int p_max);

/// Number of samples needed on each side of the center for numeric_chain.
[[nodiscard]] int numeric_chain_half_width(int p_max);

/// Fornberg weights for the derivative of the given order on the integer
/// offsets -half..half (unit spacing).
[[nodiscard]] std::vector<double> central_difference_weights(int order, int half);

struct CurvatureResult {
    /// k_1, ..., k_r; stops before the first degenerate Frenet direction.
    std::vector<double> k;
    /// D_0 = 1, D_1, ..., D_p: Gram determinants of the leading chain vectors.
    std::vector<double> gram;
    /// ratio[i] = D_{i+1} / (D_i |x^(i+1)|^2), the squared sine between x^(i+1)
    /// and the span of its predecessors; ratio[0] = 1.
    std::vector<double> ratio;
    /// Number of independent leading chain vectors.
    int effective_rank = 0;
};

/**
 * Generalized geodesic curvatures from Gram determinants:
 *
 *   k_i = sqrt(D_{i-1} D_{i+1}) / (D_i |x'|).
 *
 * Throws DegenerateProjection if x' = 0.
 */
[[nodiscard]] CurvatureResult generalized_curvatures(const DerivativeChain& chain,
                                                     double rank_tol = kDefaultRankTol);

struct CurvatureProfile {
    int complex_dim = 0;
    int p_max = 0;
    bool numeric = false;
    Bundle bundle = Bundle::T1M;
    std::vector<double> sigmas;
    /// curvatures[j][i-1] = k_i(sigma_j), zero-padded to p_max - 1 columns.
    std::vector<std::vector<double>> curvatures;
    std::vector<int> effective_rank;
    std::vector<std::vector<double>> gram_determinants;
    std::vector<std::vector<double>> rank_ratios;
};

/**
 * Curvatures at every `stride`-th trajectory sample: algebraic chains on T1M,
 * numeric chains (interior samples only) on TM.
 */
[[nodiscard]] CurvatureProfile curvature_profile(const Trajectory& traj, int p_max, int stride,
                                                 double rank_tol = kDefaultRankTol);

struct TheoremVerdict {
    std::string claim;
    bool pass = false;
    double residual = 0.0;
    double tolerance = 0.0;
    std::string configuration;
};

/// Relative variation of each k_i present at the first sample, against
/// max(k_i(sigma_0), floor).
[[nodiscard]] TheoremVerdict constancy_verdict(const CurvatureProfile& profile,
                                               double tol = kDefaultConstancyTol,
                                               double floor = 1e-9);

/// Largest relative variation max_j |k_i(sigma_j) - k_i(sigma_0)| / max(k_i(sigma_0), floor)
/// over the given curvature indices (1-based; empty means all present at sigma_0).
[[nodiscard]] double relative_variation(const CurvatureProfile& profile,
                                        const std::vector<int>& indices = {},
                                        double floor = 1e-9);

struct VanishingVerdict : TheoremVerdict {
    /// Smallest i with k_i = 0 at every sample (largest effective rank seen).
    int first_vanishing_index = 0;
};

/// k_6 <= tol * max(k_1, 1) at every sample. Needs n >= 4 and p_max >= 8;
/// throws Inapplicable otherwise.
[[nodiscard]] VanishingVerdict vanishing_verdict(const CurvatureProfile& profile,
                                                 double tol = kDefaultVanishingTol);

struct SpanResidual {
    int power = 0;
    double residual = 0.0;
};

/**
 * Relative least-squares residual of script_R^(2q) onto span{R^2, J R, E} and
 * script_R^(2q+1) onto span{J R^2, R, J}, q = 1..q_max, R the twisted operator.
 */
[[nodiscard]] std::vector<SpanResidual> span_residual(const SpaceFormModel& model,
                                                      const BergerParams& params,
                                                      const FrameVector& xi, const FrameVector& w,
                                                      int q_max);

} // namespace berger
