#include "fockcm/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

namespace fockcm {

std::size_t GridSpec::points() const { return ipow(static_cast<std::size_t>(M), d); }

double GridSpec::cell() const { return std::pow(delta, d); }

void GridSpec::validate() const {
    if (d < 1) throw std::invalid_argument("grid: d must be >= 1");
    if (M < 4 || (M & (M - 1)) != 0) throw std::invalid_argument("grid: M must be a power of two >= 4");
    if (!(delta > 0.0)) throw std::invalid_argument("grid: delta must be > 0");
}

namespace {

// Plans are created once per shape under a lock and then only executed,
// which FFTW allows from any thread with the new-array interface.
struct PlanKey {
    std::vector<int> dims;
    std::size_t howmany;
    std::size_t stride;
    int sign;
    bool operator<(const PlanKey& o) const {
        return std::tie(dims, howmany, stride, sign) < std::tie(o.dims, o.howmany, o.stride, o.sign);
    }
};

std::mutex plan_mutex;
std::map<PlanKey, fftw_plan> plan_cache;

fftw_plan get_plan(const PlanKey& key, cplx* data) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end()) return it->second;
    auto* p = reinterpret_cast<fftw_complex*>(data);
    int rank = static_cast<int>(key.dims.size());
    int stride = static_cast<int>(key.stride);
    fftw_plan plan = fftw_plan_many_dft(rank, key.dims.data(), static_cast<int>(key.howmany), p, nullptr, stride, 1,
                                        p, nullptr, stride, 1, key.sign,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw std::runtime_error("fft: plan creation failed");
    plan_cache.emplace(key, plan);
    return plan;
}

}  // namespace

void fft_leading(CVec& data, const std::vector<int>& lead_dims, std::size_t trailing, int sign) {
    if (data.empty()) return;
    std::size_t lead = 1;
    for (int n : lead_dims) lead *= static_cast<std::size_t>(n);
    if (lead * trailing != data.size()) throw std::invalid_argument("fft: shape mismatch");
    if (lead_dims.empty()) return;
    PlanKey key{lead_dims, trailing, trailing, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD};
    fftw_plan plan = get_plan(key, data.data());
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

void fft_nd(CVec& data, const std::vector<int>& dims, int sign) { fft_leading(data, dims, 1, sign); }

RVec wavenumbers(const GridSpec& g) {
    RVec k(static_cast<std::size_t>(g.M));
    for (int i = 0; i < g.M; ++i) k[static_cast<std::size_t>(i)] = 2.0 * std::numbers::pi * signed_freq(i, g.M) / g.L();
    return k;
}

void unflatten(std::size_t p, const GridSpec& g, int* out) {
    for (int a = g.d - 1; a >= 0; --a) {
        out[a] = static_cast<int>(p % static_cast<std::size_t>(g.M));
        p /= static_cast<std::size_t>(g.M);
    }
}

double lp_norm(const CVec& f, const GridSpec& g, double p) {
    if (p <= 0.0 || std::isinf(p)) {
        double m = 0.0;
        for (const auto& v : f) m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    for (const auto& v : f) s += std::pow(std::abs(v), p);
    return std::pow(s * g.cell(), 1.0 / p);
}

double loglog_slope(const RVec& x, const RVec& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need matching arrays of length >= 2");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(std::abs(x[i])) / n;
        my += std::log(std::abs(y[i])) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(std::abs(x[i])) - mx;
        sxy += dx * (std::log(std::abs(y[i])) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

}  // namespace fockcm
