#pragma once

#include <vector>

#include "rsnpe/common.hpp"

namespace rsnpe::flow {

/// Number of raw parameters per scalar spline: K widths, K heights, K-1
/// interior derivatives.
inline int spline_param_count(int n_bins) { return 3 * n_bins - 1; }

/// Monotone rational-quadratic spline on [-B, B], identity outside, with
/// boundary derivatives fixed to 1 so the tails join smoothly. Raw parameters
/// are unconstrained reals: widths/heights go through a softmax (with a small
/// minimum bin fraction) and derivatives through a shifted softplus that maps
/// 0 to exactly 1, so all-zero raw parameters decode to the identity map.
struct SplineParams {
    int n_bins = 0;
    Real tail_bound = 0.0;
    std::vector<Real> knots_x;    ///< K+1 ascending, [-B, B]
    std::vector<Real> knots_y;    ///< K+1 ascending, [-B, B]
    std::vector<Real> derivs;     ///< K+1 positive, ends pinned to 1
    std::vector<Real> softmax_w;  ///< cached softmax of raw widths (backward)
    std::vector<Real> softmax_h;
    std::vector<Real> sigmoid_d;  ///< d(deriv)/d(raw) for interior knots
};

SplineParams decode_spline(const Real* raw, int n_bins, Real tail_bound);

struct SplineEval {
    Real y = 0.0;
    Real log_det = 0.0;  ///< log |dy/dx| at the evaluated point
};

SplineEval rqs_forward_scalar(Real x, const SplineParams& p);

/// Closed-form inverse (quadratic solve per bin); log_det is the inverse
/// map's own log |dx/dy|, i.e. the negated forward log-derivative.
SplineEval rqs_inverse_scalar(Real y, const SplineParams& p);

/// Reverse-mode step for one forward evaluation: given upstream gradients
/// d(loss)/dy and d(loss)/d(log_det), accumulates d(loss)/d(raw params) into
/// grad_raw (length spline_param_count) and returns d(loss)/dx.
Real rqs_forward_backward(Real x, const SplineParams& p, Real g_y, Real g_logdet, Real* grad_raw);

/// Elementwise convenience wrappers: one raw parameter block per element,
/// log_det summed across elements.
struct VectorEval {
    std::vector<Real> values;
    Real log_det = 0.0;
};

VectorEval rqs_forward(const std::vector<Real>& x, const std::vector<Real>& raw_params,
                       int n_bins, Real tail_bound);
VectorEval rqs_inverse(const std::vector<Real>& y, const std::vector<Real>& raw_params,
                       int n_bins, Real tail_bound);

}  // namespace rsnpe::flow
