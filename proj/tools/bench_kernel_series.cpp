#include "cansys/volterra.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef CANSYS_HAVE_OPENMP
#include <omp.h>
#endif

using namespace cansys;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    const int nodes = argc > 1 ? std::atoi(argv[1]) : 600;
    const int kmax = argc > 2 ? std::atoi(argv[2]) : 20;
    if (nodes < 2) {
        std::fprintf(stderr, "usage: bench_kernel_series [nodes >= 2] [kmax]\n");
        return 2;
    }

    const Grid grid(0.0, 1.0, nodes);
    const BetaFamily family = make_exponential_family(0.5, Matrix::Identity(1, 1));
    const VolterraAuxiliaries aux = build_auxiliaries(family, grid);

    std::printf("kernel series, %d nodes on [0, 1], kmax=%d, tol=1e-10\n", nodes, kmax);

    auto t0 = std::chrono::steady_clock::now();
    const SimilarityKernel serial = kernel_series(aux, kmax, 1e-10, ExecutionPolicy::serial);
    const double t_serial = seconds_since(t0);
    std::printf("serial:   %.3f s  (%d terms)\n", t_serial, serial.terms_used);

    int threads = 1;
#ifdef CANSYS_HAVE_OPENMP
    threads = omp_get_max_threads();
#endif
    t0 = std::chrono::steady_clock::now();
    const SimilarityKernel parallel = kernel_series(aux, kmax, 1e-10, ExecutionPolicy::parallel);
    const double t_parallel = seconds_since(t0);
    std::printf("parallel: %.3f s  (%d threads)\n", t_parallel, threads);
    std::printf("speedup:  %.2fx\n", t_parallel > 0.0 ? t_serial / t_parallel : 0.0);

    const double diff = max_abs(Matrix(serial.V - parallel.V));
    std::printf("serial vs parallel max |difference|: %.1e (must be exactly 0)\n", diff);
    return diff == 0.0 ? 0 : 1;
}
