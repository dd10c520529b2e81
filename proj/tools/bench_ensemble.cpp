// Compares the serial reference ensemble driver against the OpenMP one and
// checks that both produce identical summaries.

#include "sdelab/engine.hpp"
#include "sdelab/noise.hpp"

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace sdelab;

namespace {

double run_timed(ExecMode mode, const ModelSpec& model, const NoiseSource& src,
                 std::int64_t n_paths, std::int64_t n_steps, EnsembleRun& out) {
    const auto t0 = std::chrono::steady_clock::now();
    out = run_ensemble(model, src, n_paths, n_steps, 2.0, 2.0, SimOptions{}, mode);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    std::int64_t n_paths = 32;
    std::int64_t n_steps = 1000000;
    if (argc > 1) n_paths = std::atoll(argv[1]);
    if (argc > 2) n_steps = std::atoll(argv[2]);

    const ModelSpec model{0.01, 0.5, 0.0, 1.0, 1.0, 2.0, 1.0};
    const NoiseSource src = make_noise({NoiseKind::standard_normal, {}}, 4242);

    EnsembleRun serial, parallel;
    const double t_serial = run_timed(ExecMode::serial, model, src, n_paths, n_steps, serial);
    const double t_parallel =
        run_timed(ExecMode::parallel, model, src, n_paths, n_steps, parallel);

    bool identical = serial.summary.rows.size() == parallel.summary.rows.size();
    for (size_t i = 0; identical && i < serial.summary.rows.size(); ++i) {
        const auto& a = serial.summary.rows[i];
        const auto& b = parallel.summary.rows[i];
        identical = a.stream == b.stream && a.log_abs_x == b.log_abs_x &&
                    a.acc_g2 == b.acc_g2 && a.acc_absf == b.acc_absf &&
                    a.acc_xlam == b.acc_xlam;
    }

    const double steps = static_cast<double>(n_paths) * static_cast<double>(n_steps);
    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("paths=%lld steps/path=%lld\n", static_cast<long long>(n_paths),
                static_cast<long long>(n_steps));
    std::printf("serial   : %8.2fs  %.2f Msteps/s\n", t_serial, steps / t_serial / 1e6);
    std::printf("parallel : %8.2fs  %.2f Msteps/s  (%d threads)\n", t_parallel,
                steps / t_parallel / 1e6, threads);
    std::printf("speedup  : %.2fx\n", t_serial / t_parallel);
    std::printf("summaries identical: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
