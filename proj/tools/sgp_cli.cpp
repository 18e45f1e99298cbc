// Command-line front end: batch experiments, dilation evaluation, and a
// minimal SVG plotter for the emitted CSVs.
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgp/experiment.hpp"

namespace {

int cmd_run(const std::string& config_path, bool serial, const std::string& out_override) {
    sgp::ExperimentConfig config;
    try {
        if (config_path == "reference")
            config = sgp::reference_study_config();
        else
            config = sgp::load_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::string out_dir = config.output_dir;
    if (!out_override.empty()) out_dir = out_override;
    if (const char* env = std::getenv("SGP_OUTPUT_DIR")) out_dir = env;
    try {
        auto policy = serial ? sgp::ExecutionPolicy::Serial : sgp::ExecutionPolicy::OpenMP;
        auto output = sgp::run_experiment(config, policy);
        sgp::write_outputs(config, output, out_dir);
        for (const auto& s : output.summaries) {
            std::cout << s.method << ": mean " << s.mean;
            if (s.std_dev) std::cout << " std " << *s.std_dev;
            std::cout << " (" << s.runs << " runs)\n";
        }
        if (output.any_failed) {
            for (const auto& r : output.results)
                if (r.failed)
                    std::cerr << "run failed: " << r.method << "/" << r.run_index << ": "
                              << r.error << "\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_beta_eval(const std::string& family, double c, double p, double a, double b, double eps,
                  const std::vector<double>& times, double horizon, double step) {
    try {
        sgp::TimeDilation dilation = sgp::TimeDilation::constant_rate(1.0);
        if (family == "constant") {
            dilation = sgp::TimeDilation::constant_rate(eps);
        } else if (family == "power_log") {
            dilation = sgp::TimeDilation::smooth(sgp::PowerLogMu{c, p}, horizon, step);
        } else if (family == "affine") {
            dilation = sgp::TimeDilation::smooth(sgp::AffineMu{a, b}, horizon, step);
        } else {
            std::cerr << "error: unknown family '" << family << "'\n";
            return 2;
        }
        std::cout << "t,beta\n";
        for (double t : times) std::cout << t << "," << dilation.beta(t) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

// Plot column `ycol` of a CSV against its first column as an SVG polyline.
int cmd_plot(const std::string& csv_path, const std::string& svg_path, int ycol, bool logy) {
    try {
        sgp::CsvTable table = sgp::read_csv(csv_path);
        std::vector<double> xs, ys;
        for (const auto& row : table.rows) {
            if (static_cast<int>(row.size()) <= ycol) continue;
            const double* x = std::get_if<double>(&row[0]);
            const double* y = std::get_if<double>(&row[ycol]);
            if (!x || !y) continue;
            double yv = *y;
            if (logy) {
                if (yv <= 0.0) continue;
                yv = std::log10(yv);
            }
            xs.push_back(*x);
            ys.push_back(yv);
        }
        if (xs.size() < 2) {
            std::cerr << "error: fewer than two plottable rows in " << csv_path << "\n";
            return 1;
        }
        auto [xmin_it, xmax_it] = std::minmax_element(xs.begin(), xs.end());
        auto [ymin_it, ymax_it] = std::minmax_element(ys.begin(), ys.end());
        double xmin = *xmin_it, xmax = *xmax_it, ymin = *ymin_it, ymax = *ymax_it;
        if (xmax == xmin) xmax = xmin + 1.0;
        if (ymax == ymin) ymax = ymin + 1.0;
        const double W = 640, H = 400, M = 40;
        std::ofstream out(svg_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot open " << svg_path << "\n";
            return 1;
        }
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
            << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double px = M + (xs[i] - xmin) / (xmax - xmin) * (W - 2 * M);
            double py = H - M - (ys[i] - ymin) / (ymax - ymin) * (H - 2 * M);
            out << px << "," << py << " ";
        }
        out << "\"/>\n"
            << "<text x=\"" << W / 2 << "\" y=\"" << H - 8 << "\" text-anchor=\"middle\">"
            << table.header.front() << "</text>\n"
            << "<text x=\"12\" y=\"" << H / 2 << "\" transform=\"rotate(-90 12 " << H / 2
            << ")\" text-anchor=\"middle\">"
            << (ycol < static_cast<int>(table.header.size()) ? table.header[ycol] : "y")
            << (logy ? " (log10)" : "") << "</text>\n</svg>\n";
        std::cout << "wrote " << svg_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic gradient process experiment driver"};
    app.require_subcommand(1);

    std::string config_path;
    bool serial = false;
    std::string out_override;
    auto* run = app.add_subcommand("run", "execute a batch experiment from a JSON config "
                                          "(or the literal name 'reference')");
    run->add_option("config", config_path, "config path or 'reference'")->required();
    run->add_flag("--serial", serial, "disable the parallel execution policy");
    run->add_option("--output-dir", out_override, "override the configured output directory");

    std::string family = "power_log";
    double c = 100.0, p = 0.3, a = 1.0, b = 1.0, eps = 1.0;
    double horizon = 1000.0, step = 0.1;
    std::vector<double> times;
    auto* beta = app.add_subcommand("beta-eval", "print beta(t) for a dilation family");
    beta->add_option("--family", family, "constant | power_log | affine");
    beta->add_option("--c", c, "power_log scale");
    beta->add_option("--p", p, "power_log exponent");
    beta->add_option("--a", a, "affine slope");
    beta->add_option("--b", b, "affine intercept");
    beta->add_option("--eps", eps, "constant rate epsilon");
    beta->add_option("--horizon", horizon, "cache horizon for smooth families");
    beta->add_option("--step", step, "cache step for smooth families");
    beta->add_option("times", times, "evaluation times")->required();

    std::string csv_path, svg_path = "plot.svg";
    int ycol = 1;
    bool logy = false;
    auto* plot = app.add_subcommand("plot", "render column y of a CSV against column 0 as SVG");
    plot->add_option("csv", csv_path, "input CSV")->required();
    plot->add_option("--out", svg_path, "output SVG path");
    plot->add_option("--ycol", ycol, "column index to plot (default 1)");
    plot->add_flag("--logy", logy, "log10-scale the y values");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(config_path, serial, out_override);
    if (beta->parsed()) return cmd_beta_eval(family, c, p, a, b, eps, times, horizon, step);
    return cmd_plot(csv_path, svg_path, ycol, logy);
}
