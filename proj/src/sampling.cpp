#include "gerbecal/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gerbecal {

bool Box::contains(const std::vector<double>& x) const {
    if (x.size() != lo.size()) return false;
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
    return true;
}

std::optional<Box> Box::intersect(const Box& other) const {
    if (!same_coords(other)) return std::nullopt;
    Box r;
    r.coords = coords;
    r.lo.resize(dim());
    r.hi.resize(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        r.lo[i] = std::max(lo[i], other.lo[i]);
        r.hi[i] = std::min(hi[i], other.hi[i]);
        if (!(r.lo[i] < r.hi[i])) return std::nullopt;
    }
    return r;
}

std::vector<double> Box::center() const {
    std::vector<double> c(dim());
    for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return c;
}

std::string Box::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < dim(); ++i) {
        if (i) os << " x ";
        os << coords[i] << ":(" << lo[i] << "," << hi[i] << ")";
    }
    return os.str();
}

namespace rng {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t hash_str(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::uint64_t Stream::next_u64() {
    state_ = mix(state_);
    return state_;
}

double Stream::u01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::uniform(double a, double b) { return a + u01() * (b - a); }

int Stream::uniform_int(int a, int b) {
    return a + static_cast<int>(next_u64() % static_cast<std::uint64_t>(b - a + 1));
}

Stream derive(std::uint64_t seed, const std::string& context) {
    return Stream(mix(seed ^ hash_str(context)));
}

} // namespace rng

std::vector<symexpr::Point> sample_points(const Box& box, int n, std::uint64_t seed,
                                          const std::string& context) {
    rng::Stream st = rng::derive(seed, context);
    std::vector<symexpr::Point> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        symexpr::Point p;
        for (std::size_t i = 0; i < box.dim(); ++i)
            p[box.coords[i]] = st.uniform(box.lo[i], box.hi[i]);
        pts.push_back(std::move(p));
    }
    return pts;
}

namespace kernels {

ScanResult max_abs_scan_serial(std::size_t n, const ScanFn& f) {
    ScanResult r;
    for (std::size_t i = 0; i < n; ++i) {
        double v;
        try {
            v = std::abs(f(i));
        } catch (const DomainError& e) {
            r.domain_error = true;
            r.error_idx = i;
            r.error_what = e.what();
            return r;
        }
        if (v > r.max_abs) {
            r.max_abs = v;
            r.argmax = i;
        }
    }
    return r;
}

ScanResult max_abs_scan_parallel(std::size_t n, const ScanFn& f) {
#ifdef _OPENMP
    double best = 0.0;
    long best_idx = -1;
    long err_idx = -1;
    std::string err_what;
#pragma omp parallel
    {
        double lbest = 0.0;
        long lbest_idx = -1;
        long lerr_idx = -1;
        std::string lerr_what;
#pragma omp for nowait schedule(static)
        for (long i = 0; i < static_cast<long>(n); ++i) {
            if (lerr_idx >= 0) continue;
            try {
                double v = std::abs(f(static_cast<std::size_t>(i)));
                if (lbest_idx < 0 || v > lbest) {
                    lbest = v;
                    lbest_idx = i;
                }
            } catch (const std::exception& e) {
                lerr_idx = i;
                lerr_what = e.what();
            }
        }
#pragma omp critical
        {
            if (lerr_idx >= 0 && (err_idx < 0 || lerr_idx < err_idx)) {
                err_idx = lerr_idx;
                err_what = lerr_what;
            }
            if (lbest_idx >= 0 &&
                (best_idx < 0 || lbest > best || (lbest == best && lbest_idx < best_idx))) {
                best = lbest;
                best_idx = lbest_idx;
            }
        }
    }
    ScanResult r;
    if (err_idx >= 0) {
        r.domain_error = true;
        r.error_idx = static_cast<std::size_t>(err_idx);
        r.error_what = err_what;
        return r;
    }
    r.max_abs = best;
    r.argmax = best_idx >= 0 ? static_cast<std::size_t>(best_idx) : 0;
    return r;
#else
    return max_abs_scan_serial(n, f);
#endif
}

ScanResult max_abs_scan(std::size_t n, const ScanFn& f) {
    if (n >= 512) return max_abs_scan_parallel(n, f);
    return max_abs_scan_serial(n, f);
}

void eval_batch_serial(const symexpr::Expr& e, const std::vector<symexpr::Point>& pts,
                       std::vector<double>& out) {
    out.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) out[i] = e.eval(pts[i]);
}

void eval_batch_parallel(const symexpr::Expr& e, const std::vector<symexpr::Point>& pts,
                         std::vector<double>& out) {
    out.resize(pts.size());
    bool failed = false;
    std::string what;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long i = 0; i < static_cast<long>(pts.size()); ++i) {
        try {
            out[static_cast<std::size_t>(i)] = e.eval(pts[static_cast<std::size_t>(i)]);
        } catch (const std::exception& ex) {
#ifdef _OPENMP
#pragma omp critical
#endif
            {
                failed = true;
                what = ex.what();
            }
        }
    }
    if (failed) throw DomainError(what);
}

} // namespace kernels

SampledMax sampled_max_abs(const std::vector<symexpr::Expr>& residuals, const Box& box,
                           const VerifyCtx& ctx, const std::string& context) {
    auto pts = sample_points(box, ctx.samples, ctx.seed, context);
    const std::size_t m = residuals.size();
    const std::size_t total = pts.size() * m;
    auto f = [&](std::size_t k) -> double {
        const auto& p = pts[k / m];
        try {
            return residuals[k % m].eval(p);
        } catch (const DomainError& e) {
            throw DomainError(e.what(), point_str(p));
        }
    };
    auto r = kernels::max_abs_scan(total, f);
    if (r.domain_error) {
        throw DomainError(r.error_what, point_str(pts[r.error_idx / m]));
    }
    SampledMax out;
    out.value = r.max_abs;
    if (total > 0) out.witness = pts[r.argmax / m];
    return out;
}

EqualityResult equal_on_samples(const symexpr::Expr& a, const symexpr::Expr& b, const Box& box,
                                int n, double tol, std::uint64_t seed,
                                const std::string& context) {
    if (n < 1) throw PreconditionFailed("equal_on_samples: n >= 1");
    if (tol <= 0) throw PreconditionFailed("equal_on_samples: tol > 0");
    for (std::size_t i = 0; i < box.dim(); ++i)
        if (!(box.lo[i] < box.hi[i])) throw PreconditionFailed("equal_on_samples: nondegenerate box");
    auto pts = sample_points(box, n, seed, context);
    EqualityResult res;
    for (const auto& p : pts) {
        double va, vb;
        try {
            va = a.eval(p);
            vb = b.eval(p);
        } catch (const DomainError& e) {
            throw DomainError(e.what(), point_str(p));
        }
        double rel = std::abs(va - vb) / (1.0 + std::abs(va));
        if (rel > res.worst_residual) {
            res.worst_residual = rel;
            res.witness = p;
        }
        if (rel > tol) res.equal = false;
    }
    return res;
}

symexpr::Expr random_polynomial(rng::Stream& st, const std::vector<std::string>& vars,
                                int max_degree, int terms) {
    using symexpr::Expr;
    Expr sum;
    for (int t = 0; t < terms; ++t) {
        double coef = 0.5 * st.uniform_int(-8, 8);
        if (coef == 0.0) coef = 1.0;
        Expr mono = Expr::constant(coef);
        int budget = st.uniform_int(0, max_degree);
        for (int d = 0; d < budget; ++d) {
            const auto& v = vars[static_cast<std::size_t>(st.uniform_int(0, static_cast<int>(vars.size()) - 1))];
            mono = mono * Expr::var(v);
        }
        sum = sum + mono;
    }
    return sum.normalized();
}

std::string point_str(const symexpr::Point& p) {
    if (p.empty()) return "";
    std::ostringstream os;
    os << "(";
    bool first = true;
    for (const auto& [k, v] : p) {
        if (!first) os << ", ";
        os << k << "=" << v;
        first = false;
    }
    os << ")";
    return os.str();
}

} // namespace gerbecal
