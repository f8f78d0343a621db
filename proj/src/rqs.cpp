#include "rsnpe/rqs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rsnpe::flow {

namespace {

constexpr Real kMinBinFraction = 1e-3;
// softplus(kDerivShift) == 1, so zero raw derivatives decode to slope 1.
const Real kDerivShift = std::log(std::exp(1.0) - 1.0);

Real softplus(Real x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
Real sigmoid(Real x) { return 1.0 / (1.0 + std::exp(-x)); }

void softmax_into(const Real* raw, int n, std::vector<Real>& out) {
    out.resize(n);
    Real mx = raw[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, raw[i]);
    Real sum = 0.0;
    for (int i = 0; i < n; ++i) {
        out[i] = std::exp(raw[i] - mx);
        sum += out[i];
    }
    for (int i = 0; i < n; ++i) out[i] /= sum;
}

int find_bin(const std::vector<Real>& knots, Real v) {
    // Largest k with knots[k] <= v, clamped to a valid bin index.
    const auto it = std::upper_bound(knots.begin(), knots.end(), v);
    int k = static_cast<int>(it - knots.begin()) - 1;
    return std::clamp(k, 0, static_cast<int>(knots.size()) - 2);
}

struct BinTerms {
    int k;
    Real xi, u, s, q, N, D, M;
};

BinTerms bin_terms(Real x, const SplineParams& p) {
    BinTerms t;
    t.k = find_bin(p.knots_x, x);
    const Real w = p.knots_x[t.k + 1] - p.knots_x[t.k];
    const Real h = p.knots_y[t.k + 1] - p.knots_y[t.k];
    t.xi = (x - p.knots_x[t.k]) / w;
    t.u = t.xi * (1.0 - t.xi);
    t.s = h / w;
    t.q = p.derivs[t.k] + p.derivs[t.k + 1] - 2.0 * t.s;
    t.D = t.s + t.q * t.u;
    t.N = t.s * t.xi * t.xi + p.derivs[t.k] * t.u;
    t.M = p.derivs[t.k + 1] * t.xi * t.xi + 2.0 * t.s * t.u +
          p.derivs[t.k] * (1.0 - t.xi) * (1.0 - t.xi);
    return t;
}

}  // namespace

SplineParams decode_spline(const Real* raw, int n_bins, Real tail_bound) {
    if (n_bins < 2) throw std::invalid_argument("decode_spline: need at least 2 bins");
    if (!(tail_bound > 0.0)) throw std::invalid_argument("decode_spline: tail bound must be > 0");
    const int count = spline_param_count(n_bins);
    for (int i = 0; i < count; ++i) {
        if (!std::isfinite(raw[i])) {
            throw std::invalid_argument("decode_spline: non-finite raw parameter at index " +
                                        std::to_string(i));
        }
    }

    SplineParams p;
    p.n_bins = n_bins;
    p.tail_bound = tail_bound;
    softmax_into(raw, n_bins, p.softmax_w);
    softmax_into(raw + n_bins, n_bins, p.softmax_h);

    const Real span = 2.0 * tail_bound;
    const Real free_frac = 1.0 - n_bins * kMinBinFraction;
    p.knots_x.resize(n_bins + 1);
    p.knots_y.resize(n_bins + 1);
    p.knots_x[0] = -tail_bound;
    p.knots_y[0] = -tail_bound;
    for (int i = 0; i < n_bins; ++i) {
        const Real w = span * (kMinBinFraction + free_frac * p.softmax_w[i]);
        const Real h = span * (kMinBinFraction + free_frac * p.softmax_h[i]);
        p.knots_x[i + 1] = p.knots_x[i] + w;
        p.knots_y[i + 1] = p.knots_y[i] + h;
    }
    p.knots_x[n_bins] = tail_bound;  // absorb rounding in the last knot
    p.knots_y[n_bins] = tail_bound;

    p.derivs.assign(n_bins + 1, 1.0);
    p.sigmoid_d.resize(n_bins - 1);
    for (int i = 0; i < n_bins - 1; ++i) {
        const Real r = raw[2 * n_bins + i] + kDerivShift;
        p.derivs[i + 1] = softplus(r);
        p.sigmoid_d[i] = sigmoid(r);
    }
    return p;
}

SplineEval rqs_forward_scalar(Real x, const SplineParams& p) {
    if (!(x > -p.tail_bound && x < p.tail_bound)) return SplineEval{x, 0.0};
    const BinTerms t = bin_terms(x, p);
    const Real h = p.knots_y[t.k + 1] - p.knots_y[t.k];
    SplineEval e;
    e.y = p.knots_y[t.k] + h * t.N / t.D;
    e.log_det = 2.0 * std::log(t.s) + std::log(t.M) - 2.0 * std::log(t.D);
    return e;
}

SplineEval rqs_inverse_scalar(Real y, const SplineParams& p) {
    if (!(y > -p.tail_bound && y < p.tail_bound)) return SplineEval{y, 0.0};
    const int k = find_bin(p.knots_y, y);
    const Real w = p.knots_x[k + 1] - p.knots_x[k];
    const Real h = p.knots_y[k + 1] - p.knots_y[k];
    const Real s = h / w;
    const Real dk = p.derivs[k];
    const Real dk1 = p.derivs[k + 1];
    const Real q = dk + dk1 - 2.0 * s;
    const Real delta = y - p.knots_y[k];

    const Real a = delta * q + h * (s - dk);
    const Real b = h * dk - delta * q;
    const Real c = -s * delta;
    const Real disc = b * b - 4.0 * a * c;
    const Real xi = 2.0 * c / (-b - std::sqrt(std::max(disc, 0.0)));
    const Real xic = std::clamp(xi, 0.0, 1.0);

    const Real u = xic * (1.0 - xic);
    const Real D = s + q * u;
    const Real M = dk1 * xic * xic + 2.0 * s * u + dk * (1.0 - xic) * (1.0 - xic);

    SplineEval e;
    e.y = p.knots_x[k] + xic * w;
    e.log_det = -(2.0 * std::log(s) + std::log(M) - 2.0 * std::log(D));
    return e;
}

Real rqs_forward_backward(Real x, const SplineParams& p, Real g_y, Real g_logdet,
                          Real* grad_raw) {
    if (!(x > -p.tail_bound && x < p.tail_bound)) return g_y;  // identity tails

    const BinTerms t = bin_terms(x, p);
    const int k = t.k;
    const int K = p.n_bins;
    const Real w = p.knots_x[k + 1] - p.knots_x[k];
    const Real h = p.knots_y[k + 1] - p.knots_y[k];
    const Real dk = p.derivs[k];
    const Real dk1 = p.derivs[k + 1];
    const Real xi = t.xi, u = t.u, s = t.s, q = t.q, N = t.N, D = t.D, M = t.M;
    const Real D2 = D * D;
    const Real one_m_xi = 1.0 - xi;

    // y = y_k + h * R with R = N/D; logdet = 2 log s + log M - 2 log D.
    const Real R = N / D;
    const Real N_xi = 2.0 * s * xi + dk * (1.0 - 2.0 * xi);
    const Real D_xi = q * (1.0 - 2.0 * xi);
    const Real M_xi = 2.0 * dk1 * xi + 2.0 * s * (1.0 - 2.0 * xi) - 2.0 * dk * one_m_xi;

    const Real R_xi = (N_xi * D - N * D_xi) / D2;
    const Real R_s = (xi * xi * D - N * (1.0 - 2.0 * u)) / D2;
    const Real R_dk = u * (D - N) / D2;
    const Real R_dk1 = -N * u / D2;

    const Real L_xi = M_xi / M - 2.0 * D_xi / D;
    const Real L_s = 2.0 / s + 2.0 * u / M - 2.0 * (1.0 - 2.0 * u) / D;
    const Real L_dk = one_m_xi * one_m_xi / M - 2.0 * u / D;
    const Real L_dk1 = xi * xi / M - 2.0 * u / D;

    const Real g_xi = g_y * h * R_xi + g_logdet * L_xi;
    const Real g_s = g_y * h * R_s + g_logdet * L_s;
    const Real g_dk = g_y * h * R_dk + g_logdet * L_dk;
    const Real g_dk1 = g_y * h * R_dk1 + g_logdet * L_dk1;

    // Map back to width/height values. xi depends on widths through the left
    // knot (prefix sum) and the bin width; s = h/w; y has a prefix-sum term in
    // the heights plus the direct h_k * R factor.
    std::vector<Real> g_w(K, 0.0), g_h(K, 0.0);
    for (int j = 0; j < k; ++j) {
        g_w[j] = -g_xi / w;
        g_h[j] = g_y;
    }
    g_w[k] = -g_xi * xi / w - g_s * s / w;
    g_h[k] = g_y * R + g_s / w;

    // Chain through the softmax width/height maps.
    const Real span_free = 2.0 * p.tail_bound * (1.0 - K * kMinBinFraction);
    Real dot_w = 0.0, dot_h = 0.0;
    for (int j = 0; j < K; ++j) {
        dot_w += g_w[j] * p.softmax_w[j];
        dot_h += g_h[j] * p.softmax_h[j];
    }
    for (int j = 0; j < K; ++j) {
        grad_raw[j] += span_free * p.softmax_w[j] * (g_w[j] - dot_w);
        grad_raw[K + j] += span_free * p.softmax_h[j] * (g_h[j] - dot_h);
    }

    // Interior derivative knots: d_m = softplus(raw + shift), ends are fixed.
    if (k >= 1) grad_raw[2 * K + (k - 1)] += g_dk * p.sigmoid_d[k - 1];
    if (k + 1 <= K - 1) grad_raw[2 * K + k] += g_dk1 * p.sigmoid_d[k];

    return g_xi / w;
}

VectorEval rqs_forward(const std::vector<Real>& x, const std::vector<Real>& raw_params,
                       int n_bins, Real tail_bound) {
    const int count = spline_param_count(n_bins);
    if (raw_params.size() != x.size() * static_cast<std::size_t>(count)) {
        throw std::invalid_argument("rqs_forward: expected " + std::to_string(count) +
                                    " raw parameters per element");
    }
    VectorEval out;
    out.values.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const SplineParams p = decode_spline(raw_params.data() + i * count, n_bins, tail_bound);
        const SplineEval e = rqs_forward_scalar(x[i], p);
        out.values[i] = e.y;
        out.log_det += e.log_det;
    }
    return out;
}

VectorEval rqs_inverse(const std::vector<Real>& y, const std::vector<Real>& raw_params,
                       int n_bins, Real tail_bound) {
    const int count = spline_param_count(n_bins);
    if (raw_params.size() != y.size() * static_cast<std::size_t>(count)) {
        throw std::invalid_argument("rqs_inverse: expected " + std::to_string(count) +
                                    " raw parameters per element");
    }
    VectorEval out;
    out.values.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const SplineParams p = decode_spline(raw_params.data() + i * count, n_bins, tail_bound);
        const SplineEval e = rqs_inverse_scalar(y[i], p);
        out.values[i] = e.y;
        out.log_det += e.log_det;
    }
    return out;
}

}  // namespace rsnpe::flow
