// bgs: heatmaps and kappa-plots for block Gram-Schmidt variants.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bgs/config.hpp"
#include "bgs/errors.hpp"
#include "bgs/harness.hpp"

namespace {

struct Flags {
  std::string config;
  bgs::Settings given;
};

// Registers the shared flags; each one given on the command line lands in
// `given` under its config-file key, so flags override the file.
void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "flat key = value file with the same keys as the flags");
  auto text = [&](const char* flag, const char* key, const char* help) {
    cmd->add_option_function<std::string>(flag, [&f, key](const std::string& v) { f.given[key] = v; }, help);
  };
  auto toggle = [&](const char* flag, const char* key, const char* help) {
    cmd->add_flag_callback(flag, [&f, key] { f.given[key] = "true"; }, help);
  };
  text("--dims", "dims", "m,p,s");
  text("--mats", "mats", "comma list of matrix kinds, or all");
  text("--skels", "skels", "comma list of skeletons, all, or none");
  text("--muscs", "muscs", "comma list of muscles, or all");
  text("--rpltol", "rpltol", "replacement tolerance for the SROR variants (default 100)");
  text("--seed", "seed", "run seed (default 0)");
  text("--out", "out", "output directory (default .)");
  text("--format", "format", "csv, json, svg or a comma list");
  text("--sweep", "sweep", "a:b, a:step:b or a comma list");
  text("--threads", "threads", "worker threads, 0 = all cores");
  toggle("--t-fix", "t-fix", "fold the muscle's T factor into BCGS_IRO and BMGS projections");
  toggle("--reorth-first", "reorth-first", "BCGS_IRO: intra-orthogonalize the first block twice");
  toggle("--auto-shift", "auto-shift", "ShCholQR_RORO: retry a failed shifted Cholesky with ||X||^2");
}

bgs::RunConfig resolve(const Flags& f, bgs::RunConfig cfg) {
  if (!f.config.empty()) bgs::apply_settings(cfg, bgs::load_settings(f.config));
  bgs::apply_settings(cfg, f.given);
  return cfg;
}

void report(const bgs::ExperimentResult& res) {
  std::size_t ok = 0;
  for (const auto& c : res.cells) ok += c.status == "ok";
  std::cerr << res.experiment << ": " << res.cells.size() << " cells, " << ok << " ok\n";
  for (const auto& p : bgs::write_outputs(res)) std::cout << p.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block Gram-Schmidt stability experiments"};
  app.require_subcommand(1);

  Flags heat, kappa, glued, mono;
  auto* h = app.add_subcommand("heatmap", "skeleton x muscle grids of loss of orthogonality and residual");
  auto* k = app.add_subcommand("kappa", "kappa-plot over matrices with prescribed singular values");
  auto* g = app.add_subcommand("glued-kappa", "kappa-plot over glued matrices");
  auto* m = app.add_subcommand("monomial-kappa", "kappa-plot over monomial bases of growing block width");
  app.add_subcommand("presets", "print desk-scale versions of the reference experiment commands");
  add_common(h, heat);
  add_common(k, kappa);
  add_common(g, glued);
  add_common(m, mono);

  CLI11_PARSE(app, argc, argv);

  try {
    bgs::RunConfig base;
    base.muscles = {bgs::MuscleId::HouseQR};
    if (*h) {
      base.matrices = {bgs::MatrixKind::rand_uniform, bgs::MatrixKind::rand_normal, bgs::MatrixKind::rank_def,
                       bgs::MatrixKind::laeuchli,     bgs::MatrixKind::monomial,    bgs::MatrixKind::stewart,
                       bgs::MatrixKind::stewart_extreme, bgs::MatrixKind::s_step,   bgs::MatrixKind::newton};
      base.skeletons = {bgs::SkeletonId::BCGS, bgs::SkeletonId::BCGS_IRO, bgs::SkeletonId::BMGS};
      report(bgs::run_heatmap(resolve(heat, base)));
    } else if (*k) {
      base.dims = {100, 20, 2};
      base.skeletons = {bgs::SkeletonId::BCGS};
      report(bgs::run_kappa_plot(bgs::KappaPlotKind::Standard, resolve(kappa, base)));
    } else if (*g) {
      base.dims = {1000, 50, 4};
      base.skeletons = {bgs::SkeletonId::BCGS};
      report(bgs::run_kappa_plot(bgs::KappaPlotKind::Glued, resolve(glued, base)));
    } else if (*m) {
      base.dims = {1000, 60, 2};
      base.skeletons = {bgs::SkeletonId::BCGS};
      report(bgs::run_kappa_plot(bgs::KappaPlotKind::Monomial, resolve(mono, base)));
    } else {
      std::cout << bgs::presets_text();
    }
  } catch (const std::exception& e) {
    std::cerr << "bgs: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
