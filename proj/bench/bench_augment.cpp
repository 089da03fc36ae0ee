// Times parallel against serial path augmentation on a synthetic dataset.
// Usage: bench_augment [states] [series] [repeats]
#include "ctmcbps/diagnostics.hpp"
#include "ctmcbps/paths.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>

#ifdef CTMCBPS_HAVE_OPENMP
#include <omp.h>
#endif

using namespace ctmcbps;

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 10;
    const int series = argc > 2 ? std::atoi(argv[2]) : 500;
    const int repeats = argc > 3 ? std::atoi(argv[3]) : 5;
    if (n < 2 || series < 1 || repeats < 1) {
        std::cerr << "usage: bench_augment [states>=2] [series>=1] [repeats>=1]\n";
        return 2;
    }

    const StateSpace states = StateSpace::numbered(n);
    const FeatureSet f = chain_features(states, PairOrdering::lexicographic(n));
    Rng rng = make_stream(42, {0});
    const WeightVector w = draw_prior(f, 1.0, rng);
    const auto data = simulate_dataset(w, f, series, 3.0, 0.5, rng);
    const RateMatrix rates = build_rate_matrix(w, f);

    using Clock = std::chrono::steady_clock;
    auto time = [&](auto&& fn) {
        const auto t0 = Clock::now();
        for (int r = 0; r < repeats; ++r) {
            fn(static_cast<std::uint64_t>(r));
        }
        return std::chrono::duration<double>(Clock::now() - t0).count() / repeats;
    };

    SuffStats a(n), b(n);
    const double serial = time([&](std::uint64_t s) { a = augment_dataset_serial(data, rates, s); });
    const double parallel = time([&](std::uint64_t s) { b = augment_dataset(data, rates, s); });

    int threads = 1;
#ifdef CTMCBPS_HAVE_OPENMP
    threads = omp_get_max_threads();
#endif
    const bool same = a.c == b.c && a.h == b.h && a.n == b.n;
    std::cout << "states " << n << ", series " << series << ", threads " << threads << "\n"
              << "serial   " << serial * 1e3 << " ms\n"
              << "parallel " << parallel * 1e3 << " ms\n"
              << "speedup  " << serial / parallel << "\n"
              << "identical " << (same ? "yes" : "no") << "\n";
    return same ? 0 : 1;
}
