#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fracpm/config.hpp"
#include "fracpm/fracop.hpp"
#include "fracpm/io.hpp"
#include "fracpm/stepper.hpp"
#include "fracpm/validate.hpp"

namespace fs = std::filesystem;
using namespace fracpm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct PreparedRun {
    Mesh mesh;
    CoefficientSet coeff;
    FracOperator fracop;
    SchemeParams params;
    NodalField rho0;
};

PreparedRun prepare(const SimConfig& cfg) {
    Mesh mesh = cfg.buildMesh();
    CoefficientSet coeff = cfg.buildCoefficients();
    NodalField rho0 = smoothInitial(mesh, cfg.initialDatum(), cfg.dt, cfg.normalize_mass);

    const double delta = cfg.resolveDelta(mesh);
    const double big_l = cfg.resolveL(rho0);

    FracOperator fracop = buildFracOperator(mesh, coeff, cfg.s,
                                            MassType::Consistent, cfg.force_s);
    fracop.cg_tol = cfg.cg_tol;
    auto [lo, hi] = estimateSpectralInterval(fracop);
    fracop.lambda_lo = lo;
    fracop.lambda_hi = hi;
    attachRationalApprox(fracop, cfg.rational_tol);
    attachDeflation(fracop);

    SchemeParams params{.dt = cfg.dt,
                        .t_final = cfg.t_final,
                        .mu = cfg.mu,
                        .cutoffs = CutoffParams(delta, big_l),
                        .s = cfg.s,
                        .fp_tol = cfg.fp_tol};
    return {std::move(mesh), std::move(coeff), std::move(fracop), params,
            std::move(rho0)};
}

std::string timeTag(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", t);
    return buf;
}

int cmdRun(const std::string& config_path, std::string out_dir,
           const std::vector<double>& slices) {
    const SimConfig cfg = parseConfig(config_path);
    if (out_dir.empty()) out_dir = cfg.out_dir;
    fs::create_directories(out_dir);

    PreparedRun pr = prepare(cfg);
    std::cout << "mesh: " << pr.mesh.vertexCount() << " vertices, spectral interval ["
              << pr.fracop.lambda_lo << ", " << pr.fracop.lambda_hi
              << "], rational degree " << pr.fracop.rational->degree << " (err "
              << pr.fracop.rational->max_rel_error << ")\n";

    const bool fixed_reference =
        cfg.normalize_mass && pr.fracop.kernel_mode == KernelMode::K1;
    const NodalField ones(pr.mesh.vertexCount(), 1.0);

    DiagnosticsCsvWriter csv(out_dir + "/diagnostics.csv");
    writeSnapshotCsv(pr.mesh, pr.rho0, out_dir + "/rho_t0.csv");
    writeSnapshotVtk(pr.mesh, pr.rho0, out_dir + "/rho_t0.vtk");

    std::vector<double> pending = cfg.snapshot_times;
    run(pr.mesh, pr.coeff, pr.fracop, pr.params, pr.rho0,
        fixed_reference ? &ones : nullptr,
        [&](const SimState& st, const Diagnostics& d) {
            csv.writeRow(d);
            for (double t : pending) {
                if (std::abs(t - d.t) < cfg.dt / 2.0) {
                    const std::string tag = timeTag(t);
                    writeSnapshotCsv(pr.mesh, st.rho, out_dir + "/rho_t" + tag + ".csv");
                    writeSnapshotVtk(pr.mesh, st.rho, out_dir + "/rho_t" + tag + ".vtk");
                    writeSnapshotCsv(pr.mesh, st.c, out_dir + "/c_t" + tag + ".csv");
                    writeSnapshotVtk(pr.mesh, st.c, out_dir + "/c_t" + tag + ".vtk", "c");
                    for (double y : slices)
                        writeSliceCsv(pr.mesh, st.rho, y,
                                      out_dir + "/rho_t" + tag + "_slice_y" +
                                          timeTag(y) + ".csv");
                }
            }
        });
    csv.flush();
    std::cout << "wrote " << out_dir << "/diagnostics.csv\n";
    return kExitOk;
}

int cmdValidate(const std::string& level) {
    const ValidationReport report =
        runValidation(level == "full" ? ValidationLevel::Full : ValidationLevel::Fast);
    for (const auto& c : report.checks)
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name
                  << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
    std::cout << report.checks.size() << " checks, "
              << (report.allPassed() ? "all passed" : "FAILURES present") << "\n";
    return report.allPassed() ? kExitOk : kExitNumerical;
}

int cmdFracTest(const std::string& config_path) {
    SimConfig cfg = parseConfig(config_path);
    // Clamp to the dense-oracle guard while keeping the configured physics.
    const int max_cells = 33;
    cfg.nx = std::min(cfg.nx, max_cells);
    cfg.ny = std::min(cfg.ny, max_cells);

    const Mesh mesh = cfg.buildMesh();
    const CoefficientSet coeff = cfg.buildCoefficients();
    FracOperator op = buildFracOperator(mesh, coeff, cfg.s, MassType::Consistent,
                                        cfg.force_s);
    auto [lo, hi] = estimateSpectralInterval(op);
    op.lambda_lo = lo;
    op.lambda_hi = hi;
    attachRationalApprox(op, cfg.rational_tol);

    std::uint64_t state = 0x2545f4914f6cdd1dull;
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        NodalField f(mesh.vertexCount());
        for (double& v : f) {
            state = state * 6364136223846793005ull + 1442695040888963407ull;
            v = static_cast<double>(state >> 11) / static_cast<double>(1ull << 53) - 0.5;
        }
        const NodalField fast = fracInverseApply(op, f);
        const NodalField exact = fracInverseDenseOracle(op, f);
        double num = 0.0, den = 0.0;
        const NodalField me = op.mass.apply(exact);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double d = fast[i] - exact[i];
            num += d * d;
            den += exact[i] * me[i];
        }
        worst = std::max(worst, std::sqrt(num / den));
    }
    std::cout << "mesh " << cfg.nx << "x" << cfg.ny << ", s " << cfg.s
              << ", rational degree " << op.rational->degree << "\n";
    std::cout << "rational-vs-oracle max relative M-norm discrepancy: " << worst << "\n";
    return worst <= 10.0 * cfg.rational_tol ? kExitOk : kExitNumerical;
}

int cmdDecayFit(const std::string& csv_path, double t0, double t1, double width) {
    const auto rows = readDiagnosticsCsv(csv_path);
    std::vector<std::pair<double, double>> series;
    for (const auto& d : rows) series.emplace_back(d.t, d.l1_dist);
    const double slope = fitDecayRate(series, t0, t1);
    const double lambda1 = (M_PI / width) * (M_PI / width);
    std::cout << "fitted slope: " << slope << "\n";
    std::cout << "reference -2*lambda1: " << -2.0 * lambda1 << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite element solver for the porous medium equation with a "
                 "generalised fractional pressure"};
    app.require_subcommand(1);

    std::string config_path, out_dir, level = "fast", csv_path;
    std::vector<double> slices;
    double t0 = 0.0, t1 = 0.0, width = 4.0;

    auto* run_cmd = app.add_subcommand("run", "run a simulation from a config file");
    run_cmd->add_option("--config", config_path, "config JSON path")->required();
    run_cmd->add_option("--out", out_dir, "output directory (default: config out_dir)");
    run_cmd->add_option("--slice", slices, "y-values of cross-section extracts");

    auto* val_cmd = app.add_subcommand("validate", "run the invariant suites");
    val_cmd->add_option("--level", level, "fast|full")
        ->check(CLI::IsMember({"fast", "full"}));

    auto* frac_cmd =
        app.add_subcommand("frac-test", "compare the rational apply with the dense oracle");
    frac_cmd->add_option("--config", config_path, "config JSON path")->required();

    auto* decay_cmd =
        app.add_subcommand("decay-fit", "fit the late-time slope of log(l1_dist)");
    decay_cmd->add_option("--csv", csv_path, "diagnostics CSV path")->required();
    decay_cmd->add_option("--t0", t0, "window start")->required();
    decay_cmd->add_option("--t1", t1, "window end")->required();
    decay_cmd->add_option("--width", width, "domain width for the reference eigenvalue");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run_cmd->parsed()) return cmdRun(config_path, out_dir, slices);
        if (val_cmd->parsed()) return cmdValidate(level);
        if (frac_cmd->parsed()) return cmdFracTest(config_path);
        if (decay_cmd->parsed()) return cmdDecayFit(csv_path, t0, t1, width);
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
