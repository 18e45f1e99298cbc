// Benchmark: serial execution policy vs the OpenMP run matrix on a small
// toy-problem experiment, checking that both produce identical results.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>

#include "sgp/experiment.hpp"

int main(int argc, char** argv) {
    int runs = 16;
    long steps = 20000;
    if (argc > 1) runs = std::atoi(argv[1]);
    if (argc > 2) steps = std::atol(argv[2]);

    sgp::ExperimentConfig config;
    config.runs = runs;
    config.steps = steps;
    config.step = 0.01;
    config.record_thinning = 100;
    config.problem.kind = sgp::ProblemBlock::Kind::Toy;
    sgp::MethodBlock m;
    m.name = "bench_mjp";
    m.kind = sgp::MethodKind::Sgpc;
    m.index = sgp::IndexProcessSpec{sgp::JumpUniformSpec{1.0}};
    m.eps = 0.1;
    config.methods = {m};

    auto time_policy = [&](sgp::ExecutionPolicy policy) {
        auto t0 = std::chrono::steady_clock::now();
        auto out = sgp::run_experiment(config, policy);
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return std::make_pair(dt, out);
    };

    auto [t_serial, out_serial] = time_policy(sgp::ExecutionPolicy::Serial);
    auto [t_omp, out_omp] = time_policy(sgp::ExecutionPolicy::OpenMP);

    bool match = out_serial.results.size() == out_omp.results.size();
    double max_diff = 0.0;
    if (match) {
        for (std::size_t i = 0; i < out_serial.results.size(); ++i) {
            double d = std::abs(out_serial.results[i].terminal_metric -
                                out_omp.results[i].terminal_metric);
            max_diff = std::max(max_diff, d);
        }
        match = max_diff == 0.0;
    }

    std::cout << "runs=" << runs << " steps=" << steps << "\n"
              << "serial:  " << t_serial << " s\n"
              << "openmp:  " << t_omp << " s\n"
              << "speedup: " << t_serial / t_omp << "x\n"
              << "outputs identical: " << (match ? "yes" : "no")
              << " (max |diff| = " << max_diff << ")\n";
    return match ? 0 : 1;
}
