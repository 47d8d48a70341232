#pragma once

// Dynamic quantization. Encoder and decoder each run a Codec replica; both
// compute x_hat and d_e in closed form from the last update, so replicas fed
// the same packets agree bit for bit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "evtrig/errors.hpp"
#include "evtrig/linalg.hpp"

namespace evtrig {

struct Packet {
    std::vector<std::int64_t> symbols;
    int p = 0;  // bits per dimension
    double t_k = 0;
};

/// Uniform quantizer on [-half_width, half_width] with 2^p cells. Points on an
/// inner cell boundary go to the lower cell; the top cell is closed above.
[[nodiscard]] inline std::int64_t quantize_index(double e, double half_width, int p) {
    if (p < 0 || p > 62) throw DomainError("quantize_index: p out of range");
    const std::int64_t cells = std::int64_t{1} << p;
    if (half_width == 0.0) return 0;
    const double w = 2.0 * half_width / static_cast<double>(cells);
    const double pos = (e + half_width) / w;
    auto idx = static_cast<std::int64_t>(std::ceil(pos)) - 1;
    if (idx < 0) idx = 0;
    if (idx > cells - 1) idx = cells - 1;
    return idx;
}

/// Center of cell idx.
[[nodiscard]] inline double reconstruct(std::int64_t idx, double half_width, int p) {
    const double cells = std::ldexp(1.0, p);
    const double w = 2.0 * half_width / cells;
    return -half_width + (static_cast<double>(idx) + 0.5) * w;
}

struct CodecState {
    Vector x_hat;
    double d_e = 0;
    double delta = 0;
    double last_tx_time = 0;
    double last_update_time = 0;
};

class Codec {
public:
    /// d_e(t) = ||e^{A (t - t0)}||_inf d_e0 until the first update.
    Codec(Matrix A, Matrix Abar, Vector x_hat0, double d_e0, double t0)
        : a_(std::move(A)), abar_(std::move(Abar)), anchor_x_(std::move(x_hat0)),
          anchor_t_(t0), delta_(d_e0), t_k_(t0) {
        if (anchor_x_.size() != a_.rows()) throw DimensionError("Codec: x_hat0 has wrong dimension");
        if (!(d_e0 >= 0.0)) throw DomainError("Codec: d_e0 must be nonnegative");
    }

    [[nodiscard]] Eigen::Index n() const noexcept { return a_.rows(); }

    /// x_hat(t) = e^{Abar (t - r~)} x_hat(r~) for t after the last update.
    [[nodiscard]] Vector x_hat(double t) const {
        if (t < anchor_t_) throw CausalityError("x_hat: t precedes the last update");
        return mat_exp(abar_, t - anchor_t_) * anchor_x_;
    }

    [[nodiscard]] double d_e(double t) const {
        if (t < t_k_) throw CausalityError("d_e: t precedes the last transmission");
        return inf_norm(mat_exp(a_, t - t_k_)) * delta_;
    }

    [[nodiscard]] CodecState state(double t) const {
        return {x_hat(t), d_e(t), delta_, t_k_, anchor_t_};
    }

    [[nodiscard]] bool pending() const noexcept { return pending_; }
    [[nodiscard]] double last_update_time() const noexcept { return anchor_t_; }
    [[nodiscard]] double last_tx_time() const noexcept { return t_k_; }

    /// Quantizes x - x_hat(t) componentwise with p bits inside the box of half-width d_e(t).
    /// With strict = false an error outside the box is clamped to the edge cells.
    [[nodiscard]] Packet encode(const Vector& x, int p, double t, bool strict = true) {
        if (pending_) throw InvariantBreach("encode: a packet is already in flight");
        if (x.size() != n()) throw DimensionError("encode: state has wrong dimension");
        const Vector xh = x_hat(t);
        const double de = d_e(t);
        const double err = inf_norm(Vector(x - xh));
        // Both states carry rounding of order eps * |x|, which a deeply zoomed box cannot resolve.
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(inf_norm(x), inf_norm(xh));
        if (strict && err > de * (1.0 + 1e-12) + floor) {
            throw InvariantBreach("encode: |x - x_hat|_inf = " + std::to_string(err) +
                                  " exceeds d_e = " + std::to_string(de) + " at t = " +
                                  std::to_string(t));
        }
        Packet pkt;
        pkt.p = p;
        pkt.t_k = t;
        pkt.symbols.resize(static_cast<std::size_t>(n()));
        for (Eigen::Index i = 0; i < n(); ++i) {
            pkt.symbols[static_cast<std::size_t>(i)] = quantize_index(x(i) - xh(i), de, p);
        }
        pending_ = true;
        return pkt;
    }

    /// z_D = x_hat(t_k^-) + reconstructed error.
    [[nodiscard]] Vector decode(const Packet& pkt) const {
        const Vector xh = x_hat(pkt.t_k);
        const double de = d_e(pkt.t_k);
        Vector z = xh;
        for (Eigen::Index i = 0; i < n(); ++i) {
            z(i) += reconstruct(pkt.symbols.at(static_cast<std::size_t>(i)), de, pkt.p);
        }
        return z;
    }

    /// Applies the jump map at r~:
    /// x_hat(r~) = e^{Abar D} x_hat(t_k^-) + e^{A D} (z_D - x_hat(t_k^-)), D = r~ - t_k,
    /// and restarts d_e with delta_k = d_e(t_k)/2^p.
    void apply(const Packet& pkt, double r_tilde) {
        if (r_tilde < pkt.t_k) throw CausalityError("apply: update precedes transmission");
        if (pkt.t_k < anchor_t_) throw CausalityError("apply: packet older than the last update");
        const Vector xm = x_hat(pkt.t_k);
        const double de = d_e(pkt.t_k);
        const Vector z = decode(pkt);
        const double d = r_tilde - pkt.t_k;
        anchor_x_ = mat_exp(abar_, d) * xm + mat_exp(a_, d) * (z - xm);
        anchor_t_ = r_tilde;
        delta_ = std::ldexp(de, -pkt.p);
        t_k_ = pkt.t_k;
        pending_ = false;
    }

private:
    Matrix a_, abar_;
    Vector anchor_x_;
    double anchor_t_;
    double delta_;
    double t_k_;
    bool pending_ = false;
};

}  // namespace evtrig
