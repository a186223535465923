// Throughput comparison of the serial reference kernels against the
// OpenMP variants, on the batch-evaluation loop that underlies every
// sampled check.
#include <chrono>
#include <cstdio>
#include <string>

#include "gerbecal/sampling.hpp"

using namespace gerbecal;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    std::size_t n = 400000;
    int reps = 5;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--points" && i + 1 < argc) n = std::stoull(argv[++i]);
        if (a == "--reps" && i + 1 < argc) reps = std::stoi(argv[++i]);
    }

    Box box{{"x", "y", "z"}, {-2, -2, -2}, {2, 2, 2}};
    symexpr::Expr e =
        symexpr::parse_expr("x^3*y - sin(x*z) + exp(y/4)*cos(z) + (x+y+z)^2/3 - x*y*z");
    auto pts = sample_points(box, static_cast<int>(n), 0x5EED, "bench");

    std::vector<double> out_serial, out_parallel;
    double t_serial = 1e300, t_parallel = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = Clock::now();
        kernels::eval_batch_serial(e, pts, out_serial);
        t_serial = std::min(t_serial, ms_since(t0));
        t0 = Clock::now();
        kernels::eval_batch_parallel(e, pts, out_parallel);
        t_parallel = std::min(t_parallel, ms_since(t0));
    }
    bool same = out_serial == out_parallel;

    auto f = [&](std::size_t i) { return out_serial[i]; };
    double s_serial = 1e300, s_parallel = 1e300;
    kernels::ScanResult rs{}, rp{};
    for (int r = 0; r < reps; ++r) {
        auto t0 = Clock::now();
        rs = kernels::max_abs_scan_serial(n, f);
        s_serial = std::min(s_serial, ms_since(t0));
        t0 = Clock::now();
        rp = kernels::max_abs_scan_parallel(n, f);
        s_parallel = std::min(s_parallel, ms_since(t0));
    }
    bool scan_same = rs.max_abs == rp.max_abs && rs.argmax == rp.argmax;

    std::printf("points                 %zu\n", n);
    std::printf("eval serial            %9.2f ms   %8.2f Mpts/s\n", t_serial,
                n / (1e3 * t_serial));
    std::printf("eval openmp            %9.2f ms   %8.2f Mpts/s   speedup %.2fx\n", t_parallel,
                n / (1e3 * t_parallel), t_serial / t_parallel);
    std::printf("scan serial            %9.2f ms\n", s_serial);
    std::printf("scan openmp            %9.2f ms   speedup %.2fx\n", s_parallel,
                s_serial / s_parallel);
    std::printf("results identical      eval=%s scan=%s\n", same ? "yes" : "NO",
                scan_same ? "yes" : "NO");
    return (same && scan_same) ? 0 : 1;
}
