#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gerbecal/expr.hpp"

namespace gerbecal {

/// Default verification parameters.
struct VerifyCtx {
    int samples = 25;
    double tol = 1e-9;
    std::uint64_t seed = 0x5EED;
};

/// Open coordinate box in R^n with named coordinates.
struct Box {
    std::vector<std::string> coords;
    std::vector<double> lo, hi;

    std::size_t dim() const { return coords.size(); }
    bool same_coords(const Box& other) const { return coords == other.coords; }
    bool contains(const std::vector<double>& x) const;
    std::optional<Box> intersect(const Box& other) const;
    std::vector<double> center() const;
    std::string str() const;
};

namespace rng {

/// splitmix64; used for all seeding so streams are platform-stable.
std::uint64_t mix(std::uint64_t x);
std::uint64_t hash_str(const std::string& s);

/// Small deterministic generator (xorshift-style over splitmix64 stream).
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ull) {}
    std::uint64_t next_u64();
    double u01();                    // [0, 1)
    double uniform(double a, double b);
    int uniform_int(int a, int b);   // inclusive
private:
    std::uint64_t state_;
};

/// Stream derived from a base seed and a context label; the label keeps
/// checks independent of evaluation order.
Stream derive(std::uint64_t seed, const std::string& context);

} // namespace rng

/// Seeded sample points in a box.
std::vector<symexpr::Point> sample_points(const Box& box, int n, std::uint64_t seed,
                                          const std::string& context);

namespace kernels {

/// Result of a max-|f| scan over an index range.
struct ScanResult {
    double max_abs = 0.0;
    std::size_t argmax = 0;
    bool domain_error = false;
    std::size_t error_idx = 0;
    std::string error_what;
};

using ScanFn = std::function<double(std::size_t)>;

/// Serial reference implementation.
ScanResult max_abs_scan_serial(std::size_t n, const ScanFn& f);

/// OpenMP implementation; bitwise-identical results to the serial scan
/// (max reduction with lowest-index tie break, lowest-index error wins).
ScanResult max_abs_scan_parallel(std::size_t n, const ScanFn& f);

/// Dispatches to the parallel kernel for large scans.
ScanResult max_abs_scan(std::size_t n, const ScanFn& f);

/// Batch expression evaluation, the hot loop behind every sampled check.
void eval_batch_serial(const symexpr::Expr& e, const std::vector<symexpr::Point>& pts,
                       std::vector<double>& out);
void eval_batch_parallel(const symexpr::Expr& e, const std::vector<symexpr::Point>& pts,
                         std::vector<double>& out);

} // namespace kernels

/// Max |e| over seeded samples in the box.  Domain errors surface as
/// DomainError carrying the witness point.
struct SampledMax {
    double value = 0.0;
    symexpr::Point witness;
};
SampledMax sampled_max_abs(const std::vector<symexpr::Expr>& residuals, const Box& box,
                           const VerifyCtx& ctx, const std::string& context);

/// Relative comparison |a-b| <= tol*(1+|a|) over seeded samples.
struct EqualityResult {
    bool equal = true;
    double worst_residual = 0.0;
    symexpr::Point witness;
};
EqualityResult equal_on_samples(const symexpr::Expr& a, const symexpr::Expr& b, const Box& box,
                                int n, double tol, std::uint64_t seed,
                                const std::string& context = "equal_on_samples");

/// Random degree-bounded polynomial in the box coordinates, with small
/// half-integer coefficients so algebraic identities stay near machine
/// precision.
symexpr::Expr random_polynomial(rng::Stream& st, const std::vector<std::string>& vars,
                                int max_degree, int terms = 4);

std::string point_str(const symexpr::Point& p);

} // namespace gerbecal
