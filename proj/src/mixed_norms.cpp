#include "fockcm/mixed_norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fockcm {

double WeightParams::M_alpha01() const { return 0.5 * std::max(std::exp(alpha1), std::exp(-alpha0)); }

void WeightParams::validate() const {
    if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    if (!(alpha0 < alpha1)) throw std::invalid_argument("alpha0 must be below alpha1");
    if (!(C_V > 0.0)) throw std::invalid_argument("C_V must be positive");
}

double SectorProfile::weighted_norm(std::size_t k, double alpha) const {
    const RVec& s = sq.at(k);
    double acc = 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) acc += std::exp(2.0 * alpha * static_cast<double>(n)) * s[n];
    return std::sqrt(acc);
}

SectorProfile sector_profile(const Trajectory& tr) {
    if (tr.times.size() != tr.states.size()) throw std::invalid_argument("trajectory times and states differ in length");
    SectorProfile out;
    out.times = tr.times;
    out.sq.reserve(tr.states.size());
    for (const auto& v : tr.states) {
        RVec s(static_cast<std::size_t>(v.nmax) + 1, 0.0);
        for (int n = 0; n <= v.nmax; ++n) s[static_cast<std::size_t>(n)] = cm_sector_norm2(v, n);
        out.sq.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

TimeProfile::TimeProfile(RVec times, RVec values) : t_(std::move(times)), v_(std::move(values)) {
    if (t_.empty() || t_.size() != v_.size()) throw std::invalid_argument("time profile needs matching non-empty arrays");
    for (std::size_t i = 1; i < t_.size(); ++i)
        if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("time profile nodes must increase");
    for (double& x : v_) x = std::abs(x);
}

double TimeProfile::value(double t) const {
    if (t <= t_.front()) return v_.front();
    if (t >= t_.back()) return v_.back();
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
    double s = (t - t_[i]) / (t_[i + 1] - t_[i]);
    return (1.0 - s) * v_[i] + s * v_[i + 1];
}

double TimeProfile::first_positive() const {
    for (double t : t_)
        if (t > 0.0) return t;
    throw std::invalid_argument("time profile has no positive node");
}

namespace {

// Exact integral of the linear function through (x0, g0), (x1, g1), raised to p, optionally
// times (h t)^{-1/2}.
double piece(double x0, double x1, double g0, double g1, int p, double hs) {
    double w = x1 - x0;
    if (w <= 0.0) return 0.0;
    if (hs > 0.0) {
        // p = 1 only: integral of (A + B t) t^{-1/2}
        double B = (g1 - g0) / w;
        double A = g0 - B * x0;
        double s0 = std::sqrt(x0), s1 = std::sqrt(x1);
        double r = 2.0 * A * (s1 - s0) + (2.0 / 3.0) * B * (x1 * s1 - x0 * s0);
        return r / std::sqrt(hs);
    }
    if (p == 1) return 0.5 * w * (g0 + g1);
    return w * (g0 * g0 + g0 * g1 + g1 * g1) / 3.0;
}

}  // namespace

double TimeProfile::integral(double a, double b, int p, double singular_h) const {
    if (p != 1 && p != 2) throw std::invalid_argument("time profile integrals support p = 1, 2");
    if (singular_h > 0.0 && p != 1) throw std::invalid_argument("singular weight only with p = 1");
    if (singular_h > 0.0) a = std::max(a, first_positive());
    if (!(b > a)) return 0.0;
    double acc = 0.0;
    // constant extension left and right of the nodes
    if (a < t_.front()) {
        double e = std::min(b, t_.front());
        acc += piece(a, e, v_.front(), v_.front(), p, singular_h);
    }
    if (b > t_.back()) {
        double s = std::max(a, t_.back());
        acc += piece(s, b, v_.back(), v_.back(), p, singular_h);
    }
    double lo = std::max(a, t_.front()), hi = std::min(b, t_.back());
    if (hi > lo) {
        auto it = std::upper_bound(t_.begin(), t_.end(), lo);
        std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
        for (; i + 1 < t_.size() && t_[i] < hi; ++i) {
            double x0 = std::max(lo, t_[i]), x1 = std::min(hi, t_[i + 1]);
            if (x1 <= x0) continue;
            acc += piece(x0, x1, value(x0), value(x1), p, singular_h);
        }
    }
    return acc;
}

RVec TimeProfile::running_integral(const RVec& taus, int p, double singular_h) const {
    RVec out;
    out.reserve(taus.size());
    double acc = 0.0, prev = 0.0;
    for (double tau : taus) {
        if (tau < prev) throw std::invalid_argument("running_integral: taus must increase");
        acc += integral(prev, tau, p, singular_h);
        prev = tau;
        out.push_back(acc);
    }
    return out;
}

namespace {

double node_step(const RVec& t) {
    if (t.size() < 2) throw std::invalid_argument("trajectory needs at least two nodes");
    return t[1] - t[0];
}

// Lp norm over microscopic times [a/h, b/h] given macroscopic endpoints.
struct Window {
    const TimeProfile& f;
    double h;
    double l2(double a, double b) const { return std::sqrt(f.integral(a / h, b / h, 2)); }
    double w1(double a, double b) const { return f.integral(a / h, b / h, 1, h); }
    double p1(double a, double b) const { return f.integral(a / h, b / h, 1); }
};

RVec tau_grid(const RVec& times, double h, double T, int refine) {
    double dt = node_step(times);
    RVec out;
    for (double t : times) {
        for (int j = 0; j < refine; ++j) {
            double tau = h * (t + dt * j / refine);
            if (tau >= 0.0 && tau < T) out.push_back(tau);
        }
    }
    return out;
}

RVec delta_grid(double dmax, double dmin, int substeps) {
    RVec out;
    for (int j = 0;; ++j) {
        double d = dmax * std::pow(2.0, -static_cast<double>(j) / substeps);
        if (d < dmin && j > 0) break;
        out.push_back(d);
    }
    return out;
}

}  // namespace

double n_norm(const TimeProfile& phi, int p, int i, double T, double h, const SupGrid& grid) {
    if (p != 1 && p != 2) throw std::invalid_argument("n_norm: p must be 1 or 2");
    if (i < 1 || i > 4) throw std::invalid_argument("n_norm: i must be in 1..4");
    if (!(T > 0.0) || !(h > 0.0)) throw std::invalid_argument("n_norm: T and h must be positive");
    Window W{phi, h};
    double dt = node_step(phi.times());
    double res = h * dt;  // macroscopic resolution
    auto inner = [&](double a, double b) { return p == 2 ? W.l2(a, b) : W.w1(a, b); };
    auto plain = [&](double a, double b) { return p == 2 ? W.l2(a, b) : W.p1(a, b); };
    auto dscale = [&](double d) { return p == 2 ? std::sqrt(d) : std::sqrt(d / T); };
    const double sT = std::sqrt(T);

    if (i == 1) {
        RVec taus = tau_grid(phi.times(), h, T, grid.tau_refine), micro(taus.size());
        for (std::size_t j = 0; j < taus.size(); ++j) micro[j] = taus[j] / h;
        RVec acc = phi.running_integral(micro, p, p == 1 ? h : 0.0);
        double best = 0.0;
        for (std::size_t j = 0; j < taus.size(); ++j)
            best = std::max(best, std::sqrt(T - taus[j]) * (p == 2 ? std::sqrt(acc[j]) : acc[j]));
        return best;
    }
    if (i == 3) {
        int nmax = std::max(2, static_cast<int>(std::floor(std::log2(T / res))) - 1);
        double best = 0.0;
        if (p == 2) {
            for (int n = 0; n <= nmax; ++n) {
                Interval J = dyadic_interval(T, n);
                best = std::max(best, std::pow(2.0, -0.5 * n) * W.l2(J.lo, J.hi));
            }
            return sT * best;
        }
        for (int n = 2; n <= nmax; ++n) {
            Interval J = dyadic_interval(T, n);
            best = std::max(best, std::pow(2.0, -0.5 * n) * W.p1(J.lo, J.hi));
        }
        return sT * W.w1(0.0, 0.75 * T) + best;
    }
    // i = 2 or 4
    double first_hi = i == 2 ? 0.75 * T : 0.875 * T;
    double dmax = i == 2 ? T / 8.0 : T / 12.0;
    double span = i == 2 ? 2.0 : 3.0;
    double best = 0.0;
    for (double d : delta_grid(dmax, res, grid.delta_substeps))
        best = std::max(best, dscale(d) * plain(T - span * d, T - d));
    return sT * inner(0.0, first_hi) + best;
}

double n_norm(const Trajectory& phi, int p, int i, double T, double h, const SupGrid& grid) {
    RVec vals;
    vals.reserve(phi.states.size());
    for (const auto& v : phi.states) vals.push_back(cm_norm(v));
    return n_norm(TimeProfile(phi.times, vals), p, i, T, h, grid);
}

// ---------------------------------------------------------------------------------------------

double weighted_M(const SectorProfile& u_inf, const SectorProfile& u_2, const SectorProfile& u_1,
                  const WeightParams& w, MWhich which, const SupGrid& grid) {
    w.validate();
    if (grid.alpha_samples < 1) throw std::invalid_argument("alpha_samples must be positive");
    const SectorProfile& u = which == MWhich::inf ? u_inf : (which == MWhich::two ? u_2 : u_1);
    double dt = node_step(u.times);
    bool any = false;
    for (double t : u.times)
        if (t > 0.0 && w.h * t < w.T_alpha(w.alpha0)) any = true;
    if (!any) throw std::invalid_argument("weighted_M: empty time window");

    double best = 0.0;
    for (int k = 0; k < grid.alpha_samples; ++k) {
        double alpha = w.alpha0 + k * (w.alpha1 - w.alpha0) / grid.alpha_samples;
        double Ta = w.T_alpha(alpha);
        if (which == MWhich::inf) {
            for (std::size_t j = 0; j < u.times.size(); ++j) {
                double ht = w.h * u.times[j];
                if (ht <= 0.0 || ht >= Ta) continue;
                best = std::max(best, std::sqrt((Ta - ht) / ht) * u.weighted_norm(j, alpha));
            }
            continue;
        }
        RVec vals(u.times.size());
        for (std::size_t j = 0; j < vals.size(); ++j) vals[j] = u.weighted_norm(j, alpha);
        TimeProfile f(u.times, vals);
        RVec micro;
        for (std::size_t j = 0; j < u.times.size(); ++j)
            for (int r = 0; r < grid.tau_refine; ++r) {
                double t = u.times[j] + dt * r / grid.tau_refine;
                if (t >= 0.0 && w.h * t < Ta) micro.push_back(t);
            }
        RVec acc = which == MWhich::two ? f.running_integral(micro, 2) : f.running_integral(micro, 1, w.h);
        for (std::size_t j = 0; j < micro.size(); ++j) {
            double norm = which == MWhich::two ? std::sqrt(acc[j]) : acc[j];
            best = std::max(best, std::sqrt(Ta - w.h * micro[j]) * norm);
        }
    }
    if (which == MWhich::inf) return best;
    return best / (w.M_alpha01() * w.C_V * std::sqrt(w.gamma));
}

double weighted_M_total(const SectorProfile& u_inf, const SectorProfile& u_2, const SectorProfile& u_1,
                        const WeightParams& w, const SupGrid& grid) {
    return weighted_M(u_inf, u_2, u_1, w, MWhich::inf, grid) + weighted_M(u_inf, u_2, u_1, w, MWhich::two, grid) +
           weighted_M(u_inf, u_2, u_1, w, MWhich::one, grid);
}

// ---------------------------------------------------------------------------------------------

Interval dyadic_interval(double T, int n) {
    if (n < 0) throw std::invalid_argument("dyadic_interval: n must be non-negative");
    return Interval{n, (1.0 - std::ldexp(1.0, -n)) * T, (1.0 - std::ldexp(1.0, -n - 1)) * T};
}

double DyadicPartition::covered() const {
    double s = 0.0;
    for (const auto& J : intervals) s += J.length();
    return s;
}

DyadicPartition dyadic_partition(double T, DyadicMode mode, int n_max) {
    if (!(T > 0.0)) throw std::invalid_argument("dyadic_partition: T must be positive");
    if (n_max < 0) throw std::invalid_argument("dyadic_partition: n_max must be non-negative");
    DyadicPartition P;
    P.T = T;
    P.mode = mode;
    if (mode == DyadicMode::around_0_and_T) {
        for (int n = -n_max; n < 0; ++n)
            P.intervals.push_back(Interval{n, std::ldexp(T / 4.0, n), std::ldexp(T / 2.0, n)});
        P.intervals.push_back(Interval{0, T / 4.0, T / 2.0});
    } else {
        P.intervals.push_back(dyadic_interval(T, 0));
    }
    for (int n = 1; n <= n_max; ++n) P.intervals.push_back(dyadic_interval(T, n));
    return P;
}

double alpha_prime_schedule(double alpha, double alpha1, int n) {
    if (!(alpha < alpha1)) throw std::invalid_argument("alpha_prime_schedule: alpha must be below alpha1");
    if (n < 0) throw std::invalid_argument("alpha_prime_schedule: n must be non-negative");
    if (n == 0) return (alpha1 + 6.0 * alpha) / 7.0;
    double q = std::ldexp(1.0, n + 2);
    return (alpha1 + (q - 1.0) * alpha) / q;
}

KappaBand kappa_band(int p) {
    if (p != 1 && p != 2) throw std::invalid_argument("kappa_band: p must be 1 or 2");
    // With a = |psi|_{J<=1} and the tail sups A1 (tau), A2 (delta), A3 (n >= 2):
    // A2 <= A1 <= c_p A3 <= c_p sqrt2 A2, c_p = sqrt2 / (2^{p/2} - 1)^{1/p}, and max(a/2, A1) <= N_1 <= a + A1.
    const double s2 = std::sqrt(2.0);
    const double cp = s2 / std::pow(std::pow(2.0, p / 2.0) - 1.0, 1.0 / p);
    KappaBand k;
    if (p == 2) {
        // N_2 <= 3 N_1, N_1 <= 2 N_2; N_3 <= 2 N_1, N_1 <= (sqrt3 + sqrt2) N_3
        k.k1 = std::max({3.0, cp * s2, std::sqrt(3.0) + cp});
        // N_4 <= (1 + 2 sqrt2 + sqrt(2/3)) N_2, N_2 <= sqrt(3/2) N_4
        k.k2 = 1.0 + 2.0 * s2 + std::sqrt(2.0 / 3.0);
    } else {
        // the unweighted tail terms differ from the weighted ones by at most 2/sqrt3 on [3T/4, T)
        const double w = 2.0 / std::sqrt(3.0);
        k.k1 = std::max({3.0, cp * s2 * w, 2.0 + s2, cp * w});
        k.k2 = 1.0 + w * 2.0 * s2 + std::sqrt(2.0 / 3.0);
    }
    return k;
}

}  // namespace fockcm
