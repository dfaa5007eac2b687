#include "bgs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bgs/errors.hpp"
#include "bgs/rng.hpp"
#include "bgs/svg.hpp"

namespace bgs {

namespace {

struct Input {
  std::string label;
  MatrixSpec spec;
  double sweep_value = 0.0;
  Mat X;
  double kappa = 0.0;
  double norm_x = 0.0;
};

struct Task {
  std::size_t input;
  std::optional<SkeletonId> skeleton;
  MuscleId muscle;
};

std::string compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string variant_name(const std::optional<SkeletonId>& sk, MuscleId mu, const SkeletonOptions& o) {
  if (!sk) return std::string(to_string(mu));
  std::string name(to_string(*sk));
  if (o.t_fix && supports_t_fix(*sk)) name += "_T";
  if (o.reorth_first_block && supports_reorth_first_block(*sk)) name += "_RF";
  return name + "-" + std::string(to_string(mu));
}

Input make_input(std::string label, MatrixSpec spec, double sweep_value, std::uint64_t seed) {
  spec.seed = seed ^ stable_hash("matrix|" + label);
  Input in{std::move(label), spec, sweep_value, generate(spec)};
  const auto sv = jacobi_svd_values(in.X);
  in.norm_x = sv.front();
  in.kappa = sv.back() == 0.0 ? std::numeric_limits<double>::infinity() : sv.front() / sv.back();
  return in;
}

CellResult run_cell(const Input& in, const Task& task, const RunConfig& cfg) {
  CellResult cell;
  cell.variant = variant_name(task.skeleton, task.muscle, cfg.options);
  cell.matrix = in.label;
  cell.skeleton = task.skeleton;
  cell.muscle = task.muscle;
  cell.sweep_value = in.sweep_value;
  cell.stream_seed = cfg.seed ^ stable_hash(in.label + "|" + cell.variant);
  Rng rng(cell.stream_seed);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  if (task.skeleton) {
    const SkeletonId sk = *task.skeleton;
    if (!compatible(sk, task.muscle)) {
      cell.status = "incompatible";
      cell.report = StabilityReport{nan, nan, nan, std::nullopt, in.kappa, 0, 0, Status::Ok, cfg.seed};
      return cell;
    }
    SkeletonOptions o = cfg.options;
    o.t_fix = o.t_fix && supports_t_fix(sk);
    o.reorth_first_block = o.reorth_first_block && supports_reorth_first_block(sk);
    o.record_trace = false;
    const BlockQRResult r = block_orthogonalize(in.X, cfg.dims, sk, task.muscle, o, rng);
    cell.report = make_report(in.X, r.Q, r.R, std::nullopt, r.status, r.events, in.kappa, cfg.seed, in.norm_x);
  } else {
    const MuscleOptions mo{cfg.options.rpltol, cfg.options.auto_shift, false};
    const QRResult r = intra_orthogonalize(in.X, task.muscle, mo, rng);
    std::optional<Mat> T;
    if (r.ok() && produces_t(task.muscle)) T = correction_factor(r, task.muscle);
    cell.report = make_report(in.X, r.Q, r.R, T, r.status, r.events, in.kappa, cfg.seed, in.norm_x);
  }
  cell.status = std::string(to_string(cell.report.status));
  return cell;
}

std::vector<CellResult> run_all(const std::vector<Input>& inputs, const std::vector<Task>& tasks,
                                const RunConfig& cfg) {
  std::vector<CellResult> out(tasks.size());
  unsigned n = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(tasks.size(), 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        out[i] = run_cell(inputs[tasks[i].input], tasks[i], cfg);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<Task> grid_tasks(std::size_t n_inputs, const RunConfig& cfg) {
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < n_inputs; ++i) {
    if (cfg.skeletons.empty()) {
      for (MuscleId mu : cfg.muscles) tasks.push_back({i, std::nullopt, mu});
    } else {
      for (SkeletonId sk : cfg.skeletons)
        for (MuscleId mu : cfg.muscles) tasks.push_back({i, sk, mu});
    }
  }
  return tasks;
}

// Cells are reported in enum order regardless of the order given on the command line.
RunConfig canonical(RunConfig cfg) {
  auto sort_unique = [](auto& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  sort_unique(cfg.matrices);
  sort_unique(cfg.skeletons);
  sort_unique(cfg.muscles);
  return cfg;
}

void check_config(const RunConfig& cfg) {
  cfg.dims.validate();
  if (cfg.muscles.empty()) throw ContractError("no muscles requested");
  if (!(cfg.options.rpltol >= 0.0)) throw ContractError("rpltol must be >= 0");
}

struct MetricRow {
  const char* name;
  double value;
};

std::vector<MetricRow> metric_rows(const StabilityReport& r) {
  std::vector<MetricRow> rows{{"loo", r.loo}, {"rel_res", r.rel_res}, {"rel_chol_res", r.rel_chol_res}};
  if (r.triad) {
    rows.push_back({"triad_ts", r.triad->ts});
    rows.push_back({"triad_tr", r.triad->tr});
  }
  return rows;
}

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_value(v);
}

void write_file(const std::filesystem::path& p, const std::string& text, std::vector<std::filesystem::path>& written) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for " + p.string());
  written.push_back(p);
}

std::string grid_csv(const ExperimentResult& res, const std::string& matrix, const char* metric) {
  std::ostringstream o;
  o << "skeleton";
  for (MuscleId mu : res.config.muscles) o << ',' << to_string(mu);
  o << '\n';
  std::map<std::pair<std::string, std::string>, const CellResult*> by;
  for (const auto& c : res.cells)
    if (c.matrix == matrix && c.skeleton) by[{std::string(to_string(*c.skeleton)), std::string(to_string(c.muscle))}] = &c;
  for (SkeletonId sk : res.config.skeletons) {
    o << to_string(sk);
    for (MuscleId mu : res.config.muscles) {
      const CellResult* c = by.at({std::string(to_string(sk)), std::string(to_string(mu))});
      o << ',';
      if (std::string(metric) == "status") {
        o << c->status;
      } else {
        o << format_value(std::string(metric) == "loo" ? c->report.loo : c->report.rel_res);
      }
    }
    o << '\n';
  }
  return o.str();
}

HeatGrid heat_grid(const ExperimentResult& res, const std::string& matrix, bool loo) {
  HeatGrid g;
  g.title = matrix + (loo ? ": loss of orthogonality" : ": relative residual");
  for (SkeletonId sk : res.config.skeletons) g.rows.emplace_back(to_string(sk));
  for (MuscleId mu : res.config.muscles) g.cols.emplace_back(to_string(mu));
  g.values.assign(g.rows.size(), std::vector<double>(g.cols.size(), std::numeric_limits<double>::quiet_NaN()));
  for (const auto& c : res.cells) {
    if (c.matrix != matrix || !c.skeleton) continue;
    const auto i = std::find(g.rows.begin(), g.rows.end(), to_string(*c.skeleton)) - g.rows.begin();
    const auto j = std::find(g.cols.begin(), g.cols.end(), to_string(c.muscle)) - g.cols.begin();
    g.values[i][j] = loo ? c.report.loo : c.report.rel_res;
  }
  return g;
}

}  // namespace

std::string format_value(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::vector<double> default_sweep(KappaPlotKind kind) {
  std::vector<double> v;
  switch (kind) {
    case KappaPlotKind::Standard:
      for (int t = 1; t <= 16; ++t) v.push_back(t);
      break;
    case KappaPlotKind::Glued:
      for (int e = 1; e <= 8; ++e) v.push_back(e);
      break;
    case KappaPlotKind::Monomial:
      for (int d = 2; d <= 12; d += 2) v.push_back(d);
      break;
  }
  return v;
}

ExperimentResult run_heatmap(const RunConfig& cfg_in) {
  if (cfg_in.matrices.empty()) throw ContractError("no matrices requested");
  if (cfg_in.skeletons.empty()) throw ContractError("no skeletons requested");
  const RunConfig cfg = canonical(cfg_in);
  check_config(cfg);
  std::vector<Input> inputs;
  for (MatrixKind k : cfg.matrices) {
    MatrixSpec spec;
    spec.kind = k;
    spec.dims = cfg.dims;
    inputs.push_back(make_input(std::string(to_string(k)), spec, 0.0, cfg.seed));
  }
  return {"heatmap", cfg, run_all(inputs, grid_tasks(inputs.size(), cfg), cfg)};
}

ExperimentResult run_kappa_plot(KappaPlotKind kind, const RunConfig& cfg_in) {
  RunConfig cfg = canonical(cfg_in);
  if (cfg.sweep.empty()) cfg.sweep = default_sweep(kind);
  check_config(cfg);
  std::vector<Input> inputs;
  std::string experiment;
  for (double v : cfg.sweep) {
    MatrixSpec spec;
    spec.dims = cfg.dims;
    switch (kind) {
      case KappaPlotKind::Standard:
        experiment = "kappa";
        spec.kind = MatrixKind::kappa_series;
        spec.t = v;
        inputs.push_back(make_input("kappa_series(t=" + compact(v) + ")", spec, v, cfg.seed));
        break;
      case KappaPlotKind::Glued:
        experiment = "glued-kappa";
        spec.kind = MatrixKind::glued;
        spec.r = -v;
        spec.t = -v;
        inputs.push_back(make_input("glued(r=" + compact(-v) + ";t=" + compact(-v) + ")", spec, v, cfg.seed));
        break;
      case KappaPlotKind::Monomial: {
        experiment = "monomial-kappa";
        if (v < 1 || v != std::floor(v)) throw ContractError("monomial sweep values must be positive integers");
        spec.kind = MatrixKind::monomial;
        spec.basis_width = static_cast<Index>(v);
        inputs.push_back(make_input("monomial(d=" + compact(v) + ")", spec, v, cfg.seed));
        break;
      }
    }
  }
  return {experiment, cfg, run_all(inputs, grid_tasks(inputs.size(), cfg), cfg)};
}

std::string to_csv(const ExperimentResult& res) {
  std::ostringstream o;
  o << "variant,matrix,metric,value,status,kappa,seed\n";
  for (const auto& c : res.cells)
    for (const auto& m : metric_rows(c.report))
      o << c.variant << ',' << c.matrix << ',' << m.name << ',' << format_value(m.value) << ',' << c.status << ','
        << format_value(c.report.kappa) << ',' << res.config.seed << '\n';
  return o.str();
}

std::string to_json(const ExperimentResult& res) {
  using nlohmann::json;
  const RunConfig& cfg = res.config;
  json j;
  j["experiment"] = res.experiment;
  json c;
  c["dims"] = {{"m", cfg.dims.m}, {"p", cfg.dims.p}, {"s", cfg.dims.s}};
  c["seed"] = cfg.seed;
  c["rpltol"] = cfg.options.rpltol;
  c["t_fix"] = cfg.options.t_fix;
  c["reorth_first"] = cfg.options.reorth_first_block;
  c["auto_shift"] = cfg.options.auto_shift;
  c["matrices"] = json::array();
  for (MatrixKind k : cfg.matrices) c["matrices"].push_back(to_string(k));
  if (std::find(cfg.matrices.begin(), cfg.matrices.end(), MatrixKind::stewart) != cfg.matrices.end()) {
    const auto [dup, zero] = stewart_indices(cfg.dims.n());
    c["stewart_columns"] = {{"duplicate_of_first", dup + 1}, {"zero", zero + 1}};
  }
  c["skeletons"] = json::array();
  for (SkeletonId s : cfg.skeletons) c["skeletons"].push_back(to_string(s));
  c["muscles"] = json::array();
  for (MuscleId m : cfg.muscles) c["muscles"].push_back(to_string(m));
  c["sweep"] = cfg.sweep;
  j["config"] = c;
  j["cells"] = json::array();
  for (const auto& cell : res.cells) {
    json e;
    e["variant"] = cell.variant;
    e["matrix"] = cell.matrix;
    e["skeleton"] = cell.skeleton ? json(std::string(to_string(*cell.skeleton))) : json(nullptr);
    e["muscle"] = to_string(cell.muscle);
    e["sweep"] = cell.sweep_value;
    e["status"] = cell.status;
    e["stream_seed"] = cell.stream_seed;
    const auto& r = cell.report;
    e["kappa"] = json_number(r.kappa);
    e["loo"] = json_number(r.loo);
    e["rel_res"] = json_number(r.rel_res);
    e["rel_chol_res"] = json_number(r.rel_chol_res);
    if (r.triad) e["triad"] = {{"ts", json_number(r.triad->ts)}, {"tr", json_number(r.triad->tr)}};
    e["sync_skeleton"] = r.sync_skeleton;
    e["sync_muscle"] = r.sync_muscle;
    e["seed"] = r.seed;
    j["cells"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_outputs(const ExperimentResult& res) {
  const RunConfig& cfg = res.config;
  std::filesystem::create_directories(cfg.out_dir);
  std::vector<std::filesystem::path> written;
  auto wants = [&](Format f) { return std::find(cfg.formats.begin(), cfg.formats.end(), f) != cfg.formats.end(); };
  const auto base = cfg.out_dir / res.experiment;

  if (wants(Format::Csv)) {
    write_file(base.string() + ".csv", to_csv(res), written);
    if (res.experiment == "heatmap") {
      for (MatrixKind k : cfg.matrices) {
        const std::string mat(to_string(k));
        for (const char* metric : {"loo", "rel_res", "status"})
          write_file(cfg.out_dir / ("heatmap_" + mat + "_" + metric + ".csv"), grid_csv(res, mat, metric), written);
      }
    }
  }
  if (wants(Format::Json)) write_file(base.string() + ".json", to_json(res), written);
  if (wants(Format::Svg)) {
    if (res.experiment == "heatmap") {
      for (MatrixKind k : cfg.matrices) {
        const std::string mat(to_string(k));
        write_file(cfg.out_dir / ("heatmap_" + mat + "_loo.svg"), emit_heat_svg(heat_grid(res, mat, true)), written);
        write_file(cfg.out_dir / ("heatmap_" + mat + "_rel_res.svg"), emit_heat_svg(heat_grid(res, mat, false)),
                   written);
      }
    } else {
      for (const char* metric : {"loo", "rel_res", "rel_chol_res"}) {
        PlotData plot;
        plot.title = res.experiment + ": " + metric;
        plot.ylabel = metric;
        std::map<std::string, std::size_t> index;
        for (const auto& c : res.cells) {
          auto [it, fresh] = index.try_emplace(c.variant, plot.series.size());
          if (fresh) plot.series.push_back({c.variant, {}});
          double v = c.report.loo;
          if (std::string(metric) == "rel_res") v = c.report.rel_res;
          if (std::string(metric) == "rel_chol_res") v = c.report.rel_chol_res;
          plot.series[it->second].points.emplace_back(c.report.kappa, v);
        }
        write_file(base.string() + "_" + metric + ".svg", emit_svg(plot), written);
      }
    }
  }
  return written;
}

std::string presets_text() {
  return R"(# heatmaps (full scale 10000,50,10)
bgs heatmap --dims 1000,10,5 --mats rand_uniform,rand_normal,rank_def,laeuchli,monomial,stewart,stewart_extreme,s_step,newton --skels BCGS,BCGS_IRO,BCGS_SROR,BCGS_IRO_LS,BMGS,BMGS_SVL,BMGS_CWY --muscs CGS,CGS_IRO,CGS_SRO,CGS_SROR,CGS_IRO_LS,MGS,MGS_SVL,MGS_CWY,HouseQR,CholQR,CholQR_RO,ShCholQR_RORO --rpltol 100
bgs heatmap --dims 1000,10,5 --mats laeuchli --skels BCGS_IRO,BMGS --muscs MGS_SVL --t-fix

# kappa plots
bgs glued-kappa --dims 1000,200,1 --sweep 1:8 --skels none --muscs CGS,CGS_P
bgs glued-kappa --dims 1000,50,4 --sweep 1:8 --skels BCGS,BCGS_PIP,BCGS_PIO --muscs HouseQR
bgs kappa --dims 100,20,2 --sweep 1:16 --skels BCGS,BMGS,BCGS_IRO --muscs CGS,MGS,HouseQR
bgs kappa --dims 100,20,2 --sweep 1:16 --skels BCGS,BCGS_IRO,BCGS_IRO_LS --muscs CGS,CGS_IRO,CGS_IRO_LS
bgs monomial-kappa --dims 1000,60,2 --sweep 2:2:12 --skels BCGS,BCGS_IRO,BCGS_IRO_LS --muscs CGS,CGS_IRO,CGS_IRO_LS
bgs kappa --dims 100,20,2 --sweep 1:16 --skels BMGS --muscs CGS,MGS,CGS_RO,MGS_RO,CholQR,CholQR_RO,HouseQR
bgs kappa --dims 1000,20,1 --sweep 1:16 --skels none --muscs MGS,MGS_SVL,MGS_LTS,MGS_CWY,MGS_ICWY
bgs kappa --dims 100,20,2 --sweep 1:16 --skels BMGS,BMGS_SVL,BMGS_CWY --muscs MGS,MGS_SVL,MGS_LTS,MGS_CWY,MGS_ICWY,HouseQR
bgs monomial-kappa --dims 1000,60,2 --sweep 2:2:12 --skels BMGS,BMGS_SVL,BMGS_CWY --muscs MGS,MGS_SVL,MGS_LTS,MGS_CWY,MGS_ICWY,HouseQR
)";
}

}  // namespace bgs
