// Property-based acceptance suite at desk scale. One PASS/FAIL line per
// criterion; exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bgs/harness.hpp"
#include "bgs/matgen.hpp"
#include "bgs/metrics.hpp"
#include "bgs/skeletons.hpp"

using namespace bgs;

namespace {

const double eps = machine_eps();
const BlockLayout kDesk{1000, 10, 5};

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Mat generated(MatrixKind kind, BlockLayout d, std::uint64_t seed = 2024) {
  MatrixSpec s;
  s.kind = kind;
  s.dims = d;
  s.seed = seed;
  return generate(s);
}

BlockQRResult run(const Mat& X, BlockLayout d, SkeletonId sk, MuscleId mu, SkeletonOptions o = {}) {
  Rng rng(7);
  return block_orthogonalize(X, d, sk, mu, o, rng);
}

// Cells of a kappa-plot, grouped by variant in sweep order.
std::map<std::string, std::vector<const CellResult*>> by_variant(const ExperimentResult& res) {
  std::map<std::string, std::vector<const CellResult*>> out;
  for (const auto& c : res.cells) out[c.variant].push_back(&c);
  return out;
}

// Least-squares slope of log10(loo) against log10(kappa) over ok points in
// the unsaturated band [lo, hi].
double loglog_slope(const std::vector<const CellResult*>& cells, double lo, double hi, int& used) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  used = 0;
  for (const auto* c : cells) {
    const double y = c->report.loo;
    if (c->status != "ok" || !(y >= lo && y <= hi)) continue;
    const double lx = std::log10(c->report.kappa), ly = std::log10(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++used;
  }
  if (used < 2) return std::nan("");
  return (used * sxy - sx * sy) / (used * sxx - sx * sx);
}

// ||Q1 Q1^T - Q2 Q2^T||_2 evaluated inside span[Q1 Q2], which contains the
// range of the difference, so the m x m projectors are never formed.
double projector_distance(const Mat& Q1, const Mat& Q2) {
  const Index n = Q1.cols();
  Mat both(Q1.rows(), 2 * n);
  both.set_cols(0, Q1);
  both.set_cols(n, Q2);
  const Mat B = house_qr(both).Q;
  const Mat A1 = inner(B, Q1), A2 = inner(B, Q2);
  return two_norm(gemm(A1, A1, Trans::No, Trans::Yes) - gemm(A2, A2, Trans::No, Trans::Yes));
}

Verdict sync_counts() {
  Verdict v;
  const Mat X = generated(MatrixKind::rand_normal, kDesk);
  const auto p = static_cast<std::size_t>(kDesk.p);
  const std::map<SkeletonId, std::size_t> expected{
      {SkeletonId::BCGS, p - 1},
      {SkeletonId::BCGS_IRO, 2 * (p - 1)},
      {SkeletonId::BMGS, p * (p - 1) / 2},
      {SkeletonId::BCGS_IRO_LS, p},
      {SkeletonId::BMGS_ICWY, p - 1},
  };
  for (const auto& [sk, want] : expected) {
    const auto got = run(X, kDesk, sk, MuscleId::HouseQR).events.count(Origin::Skeleton);
    v.require(got == want, std::string(to_string(sk)) + " " + std::to_string(got) + " != " + std::to_string(want));
  }
  // the final muscle call of BMGS_ICWY is exactly one HouseQR on an m x s block
  Rng rng(1);
  const auto one_call = intra_orthogonalize(X.cols_range(0, kDesk.s), MuscleId::HouseQR, {}, rng);
  const auto icwy = run(X, kDesk, SkeletonId::BMGS_ICWY, MuscleId::HouseQR);
  v.require(icwy.events.count(Origin::Muscle) == one_call.events.count(Origin::Muscle),
            "BMGS_ICWY muscle events " + std::to_string(icwy.events.count(Origin::Muscle)));
  if (v.pass) v.detail = "p=10: 9, 18, 45, 10, 9+final muscle";
  return v;
}

Verdict oracle_equivalence() {
  Verdict v;
  const Mat X = generated(MatrixKind::rand_normal, kDesk);
  const Mat Qstar = house_qr(X).Q;
  double worst = 0.0;
  int checked = 0;
  for (auto sk : kAllSkeletons)
    for (auto mu : kAllMuscles) {
      if (!compatible(sk, mu)) continue;
      const auto res = run(X, kDesk, sk, mu);
      if (!res.ok()) continue;
      ++checked;
      const double d = projector_distance(res.Q, Qstar);
      worst = std::max(worst, d);
      v.require(d <= 1e-10, std::string(to_string(sk)) + "-" + std::string(to_string(mu)) + " " + fmt(d));
    }
  v.detail = std::to_string(checked) + " ok pairs, worst " + fmt(worst) + (v.detail.empty() ? "" : "; " + v.detail);
  return v;
}

Verdict muscle_slopes() {
  Verdict v;
  RunConfig cfg;
  cfg.dims = {1000, 20, 1};
  cfg.muscles = {MuscleId::CGS_P,   MuscleId::CGS_IRO,  MuscleId::MGS,     MuscleId::MGS_RO,  MuscleId::MGS_SVL,
                 MuscleId::MGS_LTS, MuscleId::MGS_CWY, MuscleId::MGS_ICWY, MuscleId::HouseQR, MuscleId::CholQR};
  cfg.sweep.clear();
  for (int t = 1; t <= 12; ++t) cfg.sweep.push_back(t);
  const auto groups = by_variant(run_kappa_plot(KappaPlotKind::Standard, cfg));
  std::ostringstream d;
  for (const char* name : {"MGS", "MGS_SVL", "MGS_LTS", "MGS_CWY", "MGS_ICWY"}) {
    int used = 0;
    const double s = loglog_slope(groups.at(name), 0.0, 1e-2, used);
    d << name << "=" << fmt(s) << " ";
    v.require(used >= 6 && s >= 0.5 && s <= 1.5, std::string(name) + " slope " + fmt(s));
  }
  for (const char* name : {"CGS_P", "CholQR"}) {
    int used = 0;
    const double s = loglog_slope(groups.at(name), 0.0, 1e-2, used);
    d << name << "=" << fmt(s) << " ";
    v.require(used >= 4 && s >= 1.5 && s <= 2.5, std::string(name) + " slope " + fmt(s));
  }
  for (const char* name : {"HouseQR", "CGS_IRO", "MGS_RO"}) {
    double worst = 0.0;
    for (const auto* c : groups.at(name))
      if (c->report.kappa <= 1.01e7) {
        worst = std::max(worst, c->report.loo);
        v.require(c->status == "ok" && c->report.loo <= 100 * eps, std::string(name) + " loo " + fmt(c->report.loo));
      }
    d << name << "<=" << fmt(worst) << " ";
  }
  if (v.pass) v.detail = d.str();
  return v;
}

ExperimentResult glued_run() {
  RunConfig cfg;
  cfg.dims = {1000, 50, 4};
  cfg.skeletons = {SkeletonId::BCGS, SkeletonId::BCGS_PIP, SkeletonId::BCGS_PIO, SkeletonId::BCGS_IRO,
                   SkeletonId::BMGS};
  cfg.muscles = {MuscleId::HouseQR};
  // integer exponents plus one point landing near kappa = 1e8
  cfg.sweep = {1, 2, 3, 4, 4.25, 5, 6, 7, 8};
  return run_kappa_plot(KappaPlotKind::Glued, cfg);
}

Verdict block_slopes(const ExperimentResult& glued) {
  Verdict v;
  const auto g = by_variant(glued);
  double bmgs_ratio = 0.0, iro_worst = 0.0, bcgs_ratio = 1e300;
  for (const auto* c : g.at("BMGS-HouseQR")) {
    const double r = c->report.loo / (eps * c->report.kappa);
    bmgs_ratio = std::max(bmgs_ratio, r);
    v.require(c->status == "ok" && r <= 1e3, "BMGS loo/(eps kappa) " + fmt(r) + " at kappa " + fmt(c->report.kappa));
  }
  for (const auto* c : g.at("BCGS_IRO-HouseQR"))
    if (eps * c->report.kappa < 1e-3) {
      iro_worst = std::max(iro_worst, c->report.loo);
      v.require(c->status == "ok" && c->report.loo <= 100 * eps, "BCGS_IRO loo " + fmt(c->report.loo));
    }
  int big = 0;
  for (const auto* c : g.at("BCGS-HouseQR"))
    if (c->report.kappa >= 1e6) {
      ++big;
      const double r = c->report.loo / (eps * c->report.kappa);
      bcgs_ratio = std::min(bcgs_ratio, r);
      v.require(r > 10.0, "BCGS loo/(eps kappa) " + fmt(r) + " at kappa " + fmt(c->report.kappa));
    }
  v.require(big >= 3, "too few BCGS points with kappa >= 1e6");
  if (v.pass)
    v.detail = "BMGS max loo/(eps kappa)=" + fmt(bmgs_ratio) + ", BCGS_IRO max loo=" + fmt(iro_worst) +
               ", BCGS min loo/(eps kappa)=" + fmt(bcgs_ratio);
  return v;
}

Verdict cholesky_split(const ExperimentResult& glued) {
  Verdict v;
  const auto g = by_variant(glued);
  const double n = 200.0;
  double worst = 0.0;
  for (const char* name : {"BCGS_PIP-HouseQR", "BCGS_PIO-HouseQR"})
    for (const auto* c : g.at(name))
      if (c->status == "ok") {
        worst = std::max(worst, c->report.rel_chol_res);
        v.require(c->report.rel_chol_res <= 1e3 * eps * n, std::string(name) + " " + fmt(c->report.rel_chol_res));
      }
  // sweep point whose measured kappa is nearest 1e8
  std::size_t at = 0;
  const auto& bcgs = g.at("BCGS-HouseQR");
  for (std::size_t i = 1; i < bcgs.size(); ++i)
    if (std::abs(std::log10(bcgs[i]->report.kappa) - 8) < std::abs(std::log10(bcgs[at]->report.kappa) - 8)) at = i;
  const double base = bcgs[at]->report.rel_chol_res;
  std::ostringstream d;
  d << "kappa=" << fmt(bcgs[at]->report.kappa) << " BCGS=" << fmt(base);
  for (const char* name : {"BCGS_PIP-HouseQR", "BCGS_PIO-HouseQR"}) {
    const auto* c = g.at(name)[at];
    const double ratio = base / c->report.rel_chol_res;
    d << " " << name << " ratio " << fmt(ratio);
    v.require(c->status == "ok" && ratio >= 1e3, std::string(name) + " ratio " + fmt(ratio));
  }
  d << "; PIP/PIO max " << fmt(worst);
  v.detail = d.str() + (v.pass ? "" : "; " + v.detail);
  return v;
}

Verdict t_fix_effect() {
  Verdict v;
  const Mat X = generated(MatrixKind::laeuchli, kDesk);
  const auto plain = run(X, kDesk, SkeletonId::BMGS, MuscleId::MGS_SVL);
  SkeletonOptions o;
  o.t_fix = true;
  const auto fixed = run(X, kDesk, SkeletonId::BMGS, MuscleId::MGS_SVL, o);
  v.require(plain.ok() && fixed.ok(), "status not ok");
  const double a = loss_of_orthogonality(plain.Q), b = loss_of_orthogonality(fixed.Q);
  v.require(a / b >= 1e6, "improvement only " + fmt(a / b));
  v.detail = "loo " + fmt(a) + " -> " + fmt(b) + (v.pass ? "" : "; " + v.detail);
  return v;
}

Verdict robust_survival() {
  Verdict v;
  std::ostringstream d;
  for (auto kind : {MatrixKind::stewart, MatrixKind::stewart_extreme}) {
    const std::string name(to_string(kind));
    const Mat X = generated(kind, kDesk);
    SkeletonOptions o;
    o.rpltol = 100;
    const auto robust = run(X, kDesk, SkeletonId::BCGS_SROR, MuscleId::CGS_SROR, o);
    const double loo = robust.ok() ? loss_of_orthogonality(robust.Q) : std::nan("");
    const double res = robust.ok() ? relative_residual(robust.Q, robust.R, X) : std::nan("");
    v.require(robust.ok() && loo <= 1e-8 && res <= 1e-6,
              name + " BCGS_SROR-CGS_SROR status " + std::string(to_string(robust.status)) + " loo " + fmt(loo) +
                  " res " + fmt(res));
    const auto chol = run(X, kDesk, SkeletonId::BCGS, MuscleId::CholQR);
    v.require(!chol.ok(), name + " BCGS-CholQR finished ok (loo " + fmt(loss_of_orthogonality(chol.Q)) + ")");
    d << name << ": SROR loo " << fmt(loo) << " res " << fmt(res) << ", CholQR " << to_string(chol.status) << "; ";
  }
  v.detail = d.str() + v.detail;
  return v;
}

Verdict pythagorean() {
  Verdict v;
  Rng rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index s = 1 + static_cast<Index>(rng.uniform() * 6);
    const Index m = 2 * s + static_cast<Index>(rng.uniform() * 40);
    const Mat U = house_qr(rng.normal_mat(m, 2 * s)).Q;
    const Mat Y = matmul(U.cols_range(0, s), rng.normal_mat(s, s));
    const Mat Z = matmul(U.cols_range(s, s), rng.normal_mat(s, s));
    worst = std::max(worst, verify_block_pythagorean(Y, Z));
  }
  v.require(worst <= 100 * eps, "random worst " + fmt(worst));
  Mat y(4, 1), z(4, 1);
  y(0, 0) = 3;
  z(1, 0) = 4;
  const double exact = verify_block_pythagorean(y, z);
  v.require(exact == 0.0, "3-4-5 gives " + fmt(exact));
  v.detail = "100 random, worst " + fmt(worst) + "; 3-4-5 " + fmt(exact) + (v.pass ? "" : "; " + v.detail);
  return v;
}

Verdict triad() {
  Verdict v;
  const BlockLayout d{1000, 20, 1};
  std::map<MuscleId, std::pair<double, double>> worst;
  for (int t = 0; t <= 6; ++t) {
    MatrixSpec spec;
    spec.kind = MatrixKind::kappa_series;
    spec.dims = d;
    spec.seed = 500 + static_cast<std::uint64_t>(t);
    spec.t = t;
    const Mat X = generate(spec);
    const double fro_x = frobenius_norm(X);
    for (auto mu : {MuscleId::MGS_SVL, MuscleId::MGS_LTS, MuscleId::MGS_CWY, MuscleId::MGS_ICWY}) {
      const std::string name(to_string(mu));
      Rng rng(3);
      const auto res = intra_orthogonalize(X, mu, {}, rng);
      if (!res.ok()) {
        v.require(false, name + " failed at t=" + std::to_string(t));
        continue;
      }
      const auto tr = triad_residuals(res.Q, res.R, correction_factor(res, mu));
      auto& w = worst[mu];
      w.first = std::max(w.first, tr.ts);
      w.second = std::max(w.second, tr.tr / fro_x);
      v.require(tr.ts <= 100 * eps, name + " ts " + fmt(tr.ts) + " at t=" + std::to_string(t));
      v.require(tr.tr <= 100 * eps * fro_x, name + " tr " + fmt(tr.tr) + " at t=" + std::to_string(t));
    }
  }
  std::ostringstream out;
  for (const auto& [mu, w] : worst) {
    out << to_string(mu) << " ts " << fmt(w.first) << " tr/||X||_F " << fmt(w.second);
    if (mu != MuscleId::MGS_SVL) out << " (conjecture-supporting)";
    out << "; ";
  }
  v.detail = out.str() + v.detail;
  return v;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Verdict determinism() {
  Verdict v;
  const auto root = std::filesystem::temp_directory_path() / "bgs_acceptance_determinism";
  std::filesystem::remove_all(root);

  RunConfig heat;
  heat.dims = {300, 6, 3};
  heat.matrices = {MatrixKind::rand_normal, MatrixKind::laeuchli, MatrixKind::stewart_extreme};
  heat.skeletons = {SkeletonId::BCGS, SkeletonId::BCGS_SROR, SkeletonId::BMGS_CWY};
  heat.muscles = {MuscleId::CGS_SROR, MuscleId::MGS_SVL, MuscleId::HouseQR};
  heat.seed = 31;
  heat.formats = {Format::Csv, Format::Json, Format::Svg};

  RunConfig kap = heat;
  kap.dims = {200, 12, 2};
  kap.skeletons = {SkeletonId::BCGS, SkeletonId::BCGS_IRO};
  kap.muscles = {MuscleId::CGS, MuscleId::CholQR};
  kap.sweep = {1, 4, 9};

  RunConfig mono = kap;
  mono.sweep = {2, 4};

  using Runner = std::function<ExperimentResult(const RunConfig&)>;
  const std::vector<std::pair<RunConfig, Runner>> jobs{
      {heat, [](const RunConfig& c) { return run_heatmap(c); }},
      {kap, [](const RunConfig& c) { return run_kappa_plot(KappaPlotKind::Standard, c); }},
      {kap, [](const RunConfig& c) { return run_kappa_plot(KappaPlotKind::Glued, c); }},
      {mono, [](const RunConfig& c) { return run_kappa_plot(KappaPlotKind::Monomial, c); }},
  };
  std::size_t files = 0;
  for (const auto& [base, runner] : jobs) {
    std::vector<std::vector<std::filesystem::path>> written;
    for (int rep = 0; rep < 2; ++rep) {
      RunConfig c = base;
      c.out_dir = root / std::to_string(rep);
      c.threads = rep == 0 ? 1 : 3;
      written.push_back(write_outputs(runner(c)));
    }
    v.require(written[0].size() == written[1].size(), "different file sets");
    for (std::size_t i = 0; i < written[0].size() && i < written[1].size(); ++i) {
      ++files;
      v.require(slurp(written[0][i]) == slurp(written[1][i]), written[0][i].filename().string() + " differs");
    }
  }
  std::filesystem::remove_all(root);
  v.detail = std::to_string(files) + " files compared across reruns and thread counts" +
             (v.pass ? "" : "; " + v.detail);
  return v;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* title, const std::function<Verdict()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    const Verdict v = f();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s (%.1fs): %s\n", v.pass ? "PASS" : "FAIL", id, title, secs, v.detail.c_str());
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  };
  report(1, "sync-count exactness", sync_counts);
  report(2, "oracle equivalence", oracle_equivalence);
  report(3, "muscle slopes on the kappa series", muscle_slopes);
  ExperimentResult glued;
  report(4, "block slopes on the glued series", [&] {
    glued = glued_run();
    return block_slopes(glued);
  });
  report(5, "Cholesky-residual split", [&] { return cholesky_split(glued); });
  report(6, "T-fix effect on laeuchli", t_fix_effect);
  report(7, "robust-variant survival", robust_survival);
  report(8, "block Pythagorean identity", pythagorean);
  report(9, "triad residuals", triad);
  report(10, "determinism", determinism);
  return failures;
}
