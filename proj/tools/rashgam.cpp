// rashgam command line: fit, Rashomon ellipsoids, blocking, queries, reports, serve.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "rashgam/apps.hpp"
#include "rashgam/blocking.hpp"
#include "rashgam/box_oracle.hpp"
#include "rashgam/dataset.hpp"
#include "rashgam/errors.hpp"
#include "rashgam/eval.hpp"
#include "rashgam/gam.hpp"
#include "rashgam/objective.hpp"
#include "rashgam/parallel.hpp"
#include "rashgam/rset_fit.hpp"
#include "rashgam/serialize.hpp"
#include "rashgam/service.hpp"

namespace fs = std::filesystem;
using namespace rashgam;

namespace {

struct Common {
  std::string out = "out";
  std::uint64_t seed = 42;
  int threads = 0;
};

struct Opts {
  std::string data;
  std::string model;
  std::string ellipsoid;
  std::string request;
  int bins = 32;
  double lambda2 = 0.001;
  double lambda_s = 0.001;
  double merge_tol = 0.0;
  double theta = NAN;
  double theta_mult = 1.01;
  double C = 500.0;
  double lr = 1e-4;
  int iters = 1000;
  int samples_per_iter = 32;
  std::size_t k_tilde = 0;
  std::size_t plans = 50;
  bool fix_others = false;
  std::string feature;
  std::string direction = "increasing";
  std::vector<std::string> also;
  std::size_t n = 10000;
  std::size_t k = 0;
  double tau = 0.0;
  std::vector<double> ratios{0.5, 0.75, 0.9, 1.0, 1.1, 1.25, 1.5, 2.0};
  bool baselines = false;
  std::size_t bootstrap = 0;
  double delta = 1e-6;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors = "*";
};

std::string hex64(std::uint64_t h) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

RashomonConfig rashomon_config(const Opts& o) {
  RashomonConfig c;
  c.theta = o.theta;
  c.theta_mult = o.theta_mult;
  c.lambda2 = o.lambda2;
  c.lambda_s = o.lambda_s;
  c.C = o.C;
  c.learning_rate = o.lr;
  c.iterations = o.iters;
  c.samples_per_iter = o.samples_per_iter;
  return c;
}

json config_json(const RashomonConfig& c) {
  return {{"theta", std::isfinite(c.theta) ? json(c.theta) : json(nullptr)},
          {"theta_mult", c.theta_mult},
          {"lambda2", c.lambda2},
          {"lambda_s", c.lambda_s},
          {"C", c.C},
          {"learning_rate", c.learning_rate},
          {"iterations", c.iterations},
          {"samples_per_iter", c.samples_per_iter},
          {"checkpoint_every", c.checkpoint_every},
          {"checkpoint_samples", c.checkpoint_samples}};
}

/// Loaded model and the binned training data it refers to.
struct Loaded {
  GamModel model;
  std::string data_path;
};

Loaded load_model(const Opts& o) {
  Loaded l;
  l.model = model_from_json(read_json_file(o.model), &l.data_path);
  if (!o.data.empty()) l.data_path = o.data;
  return l;
}

BinnedDataset load_binned(const Loaded& l) {
  if (l.data_path.empty()) throw DataError("model has no data_path; pass --data");
  const RawDataset raw = read_csv(l.data_path);
  if (raw.feature_names() != l.model.feature_names) throw DataError("data columns do not match the model's features");
  return bin(raw, BinningSpec{l.model.bin_edges});
}

std::size_t feature_index(const GamModel& m, const std::string& name) {
  for (std::size_t j = 0; j < m.feature_names.size(); ++j)
    if (m.feature_names[j] == name) return j;
  try {
    std::size_t pos = 0;
    const unsigned long v = std::stoul(name, &pos);
    if (pos == name.size() && v < m.feature_names.size()) return v;
  } catch (const std::exception&) {
  }
  throw SpecError("unknown feature '" + name + "'");
}

Direction parse_direction(const std::string& d) {
  if (d == "increasing" || d == "up") return Direction::Increasing;
  if (d == "decreasing" || d == "down") return Direction::Decreasing;
  throw SpecError("direction must be increasing or decreasing");
}

class Run {
 public:
  Run(const Common& c, std::string command) : c_(c), dir_(c.out) {
    manifest_["command"] = std::move(command);
    manifest_["seed"] = c.seed;
    manifest_["artifacts"] = json::array();
    fs::create_directories(dir_);
  }
  json& manifest() { return manifest_; }
  void dataset(const std::string& path) {
    manifest_["dataset"] = {{"path", path}, {"fnv1a64", hex64(file_hash(path))}};
  }
  fs::path artifact(const std::string& name) {
    manifest_["artifacts"].push_back(name);
    return dir_ / name;
  }
  void write_json(const std::string& name, const json& j) { write_json_file(artifact(name), j); }
  std::ofstream open(const std::string& name) {
    std::ofstream f(artifact(name));
    if (!f) throw DataError("cannot write " + (dir_ / name).string());
    f.precision(17);
    return f;
  }
  void finish() { write_json_file(dir_ / "manifest.json", manifest_); }

 private:
  Common c_;
  fs::path dir_;
  json manifest_;
};

int cmd_fit(const Common& c, const Opts& o) {
  Run run(c, "fit");
  const RawDataset raw = read_csv(o.data);
  run.dataset(o.data);
  const BinnedDataset data = bin(raw, make_quantile_spec(raw, o.bins));
  Support support = Support::full(data);
  GamModel m = fit_erm(data, support, o.lambda2, o.lambda_s);
  if (o.merge_tol > 0) {
    support = Support::from_coefficients(data, m.coefficients(), o.merge_tol);
    m = fit_erm(data, support, o.lambda2, o.lambda_s);
  }
  const LossBreakdown L = total_loss(m, data);
  run.write_json("model.json", model_to_json(m, fs::absolute(o.data).string()));
  run.manifest()["config"] = {{"bins", o.bins}, {"lambda2", o.lambda2}, {"lambda_s", o.lambda_s},
                              {"merge_tol", o.merge_tol}};
  run.manifest()["loss"] = {{"classification", L.classification}, {"l2", L.l2}, {"steps", L.steps},
                            {"total", L.total}};
  run.finish();
  std::cout << "fit: n=" << data.n() << " bins=" << data.m() << " K=" << support.size() << " loss=" << L.total
            << " -> " << (fs::path(c.out) / "model.json").string() << '\n';
  return 0;
}

int cmd_rset(const Common& c, const Opts& o) {
  Run run(c, "rset");
  const Loaded l = load_model(o);
  const BinnedDataset data = load_binned(l);
  run.dataset(l.data_path);
  RashomonConfig cfg = rashomon_config(o);
  cfg.lambda2 = l.model.lambda2;
  cfg.lambda_s = l.model.lambda_s;
  Rng rng(c.seed);
  const RashomonFit fit = approximate(data, l.model.support, cfg, rng);
  run.write_json("ellipsoid.json", ellipsoid_to_json(fit.ellipsoid));
  run.write_json("initial_ellipsoid.json", ellipsoid_to_json(fit.initial));
  auto trace = run.open("trace.csv");
  fit.trace.write_csv(trace);
  run.manifest()["config"] = config_json(cfg);
  run.manifest()["loss_star"] = fit.loss_star;
  run.manifest()["theta"] = fit.theta;
  run.manifest()["log_volume"] = fit.ellipsoid.log_volume();
  run.manifest()["initial_log_volume"] = fit.initial.log_volume();
  run.manifest()["best_iter"] = fit.trace.best_iter;
  run.finish();
  std::cout << "rset: d=" << fit.ellipsoid.dim() << " L*=" << fit.loss_star << " theta=" << fit.theta
            << " log_volume=" << fit.ellipsoid.log_volume() << " (init " << fit.initial.log_volume() << ")\n";
  return 0;
}

int cmd_block(const Common& c, const Opts& o) {
  Run run(c, "block");
  const Loaded l = load_model(o);
  const Ellipsoid e = ellipsoid_from_json(read_json_file(o.ellipsoid));
  const BlockLayout layout = BlockLayout::from_support(l.model.support);
  if (e.dim() != layout.dim()) throw DimensionError("ellipsoid does not match the model's support");
  const double theta = e.provenance().theta;
  if (!std::isfinite(theta)) throw SpecError("ellipsoid has no theta");
  if (o.k_tilde == 0) throw SpecError("--k-tilde is required");
  Rng rng(c.seed);
  const auto explored = explore(e, layout, o.k_tilde, o.plans, theta, l.model.lambda_s, rng);
  auto csv = run.open("plans.csv");
  csv << "plan,u,log_volume,loss_bound\n";
  json items = json::array();
  for (const auto& p : explored) {
    csv << '"' << p.plan.encode() << "\"," << p.slice.u << ',' << p.slice.ellipsoid->log_volume() << ','
        << p.slice.loss_bound << '\n';
    Ellipsoid reduced = p.slice.ellipsoid->with_provenance(
        {p.slice.loss_bound, l.model.lambda2, l.model.lambda_s, std::numeric_limits<double>::quiet_NaN()});
    json j = ellipsoid_to_json(reduced);
    j["plan"] = json::parse(p.plan.encode());
    j["support_runs"] = p.plan.apply(l.model.support).run_lengths();
    items.push_back(std::move(j));
  }
  run.write_json("blocked.json", items);
  run.manifest()["config"] = {{"k_tilde", o.k_tilde}, {"plan_limit", o.plans}};
  run.manifest()["plans_total"] =
      std::to_string(count_subsets(layout.coefficients(), layout.features(), o.k_tilde));
  run.manifest()["nonempty"] = explored.size();
  run.finish();
  std::cout << "block: K=" << layout.coefficients() << " K~=" << o.k_tilde << " nonempty=" << explored.size()
            << '\n';
  return 0;
}

int cmd_vi(const Common& c, const Opts& o) {
  Run run(c, "vi");
  const Loaded l = load_model(o);
  const Ellipsoid e = ellipsoid_from_json(read_json_file(o.ellipsoid));
  std::vector<VariableImportanceRange> rows;
  json items = json::array();
  for (std::size_t j = 0; j < l.model.feature_names.size(); ++j) {
    rows.push_back(vi_range(e, FeatureRef::of(l.model, j), j, o.fix_others ? ViMode::FixOthers : ViMode::Free));
    items.push_back(to_json(rows.back(), l.model.feature_names));
  }
  auto csv = run.open("vi.csv");
  write_vi_csv(csv, rows, l.model.feature_names);
  run.write_json("vi.json", items);
  run.manifest()["config"] = {{"fix_others", o.fix_others}};
  run.finish();
  for (const auto& r : rows)
    std::cout << l.model.feature_names[r.feature] << ": [" << r.vi_minus << ", " << r.vi_plus << "]\n";
  return 0;
}

int cmd_monotone(const Common& c, const Opts& o) {
  Run run(c, "monotone");
  const Loaded l = load_model(o);
  const Ellipsoid e = ellipsoid_from_json(read_json_file(o.ellipsoid));
  std::vector<MonotoneConstraint> cons;
  cons.push_back({FeatureRef::of(l.model, feature_index(l.model, o.feature)), parse_direction(o.direction)});
  for (const auto& a : o.also) {
    const auto colon = a.find(':');
    if (colon == std::string::npos) throw SpecError("--also expects feature:direction");
    cons.push_back({FeatureRef::of(l.model, feature_index(l.model, a.substr(0, colon))),
                    parse_direction(a.substr(colon + 1))});
  }
  const MonotoneResult r = monotone_fit(e, cons);
  json j = to_json(r);
  if (std::isfinite(r.q)) j["omega_full"] = vec_to_json(expand(l.model.support, r.omega));
  run.write_json("monotone.json", j);
  run.finish();
  std::cout << "monotone: q=" << r.q << " feasible=" << (r.feasible ? "true" : "false") << '\n';
  return 0;
}

int cmd_project(const Common& c, const Opts& o) {
  Run run(c, "project");
  const Loaded l = load_model(o);
  const Ellipsoid e = ellipsoid_from_json(read_json_file(o.ellipsoid));
  const json req = read_json_file(o.request);
  const json& v = req.contains("omega_req") ? req.at("omega_req") : req.at("omega");
  Vec w = vec_from_json(v, "omega_req");
  if (static_cast<std::size_t>(w.size()) == 1 + l.model.m() && e.dim() != static_cast<std::size_t>(w.size())) {
    const Vec p = pack(l.model.support, w);
    if ((expand(l.model.support, p) - w).cwiseAbs().maxCoeff() > 0) {
      throw SpecError("request is not constant within the model's support runs");
    }
    w = p;
  }
  const ProjectionResult r = project_edit(e, w);
  json j = to_json(r);
  j["omega_full"] = vec_to_json(expand(l.model.support, r.omega));
  j["inside"] = e.contains(r.omega).q <= 1.0 + 1e-9;
  run.write_json("projected.json", j);
  run.finish();
  std::cout << "project: distance=" << r.distance << " inside_already=" << (r.inside_already ? "true" : "false")
            << '\n';
  return 0;
}

int cmd_sample(const Common& c, const Opts& o) {
  Run run(c, "sample");
  const Ellipsoid e = ellipsoid_from_json(read_json_file(o.ellipsoid));
  Rng rng(c.seed);
  const Mat pts = e.sample(rng, o.n);
  auto csv = run.open("samples.csv");
  for (Eigen::Index j = 0; j < pts.rows(); ++j) csv << (j ? "," : "") << "w" << j;
  csv << '\n';
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    for (Eigen::Index j = 0; j < pts.rows(); ++j) csv << (j ? "," : "") << pts(j, i);
    csv << '\n';
  }
  run.manifest()["config"] = {{"n", o.n}};
  run.finish();
  std::cout << "sample: " << o.n << " points in d=" << e.dim() << '\n';
  return 0;
}

int cmd_jumps(const Common& c, const Opts& o) {
  Run run(c, "jumps");
  const Loaded l = load_model(o);
  const Ellipsoid e = ellipsoid_from_json(read_json_file(o.ellipsoid));
  const std::size_t j = feature_index(l.model, o.feature);
  Rng rng(c.seed);
  const JumpReport r = jump_analysis(e, FeatureRef::of(l.model, j), j, o.k, o.n, o.tau, rng);
  json out = to_json(r);
  out["feature_name"] = l.model.feature_names[j];
  run.write_json("jumps.json", out);
  run.finish();
  std::cout << "jumps: down=" << r.down << " up=" << r.up << " flat=" << r.flat << '\n';
  return 0;
}

int cmd_precision(const Common& c, const Opts& o) {
  Run run(c, "precision");
  const Loaded l = load_model(o);
  const BinnedDataset data = load_binned(l);
  run.dataset(l.data_path);
  if (o.baselines) {
    RashomonConfig cfg = rashomon_config(o);
    cfg.lambda2 = l.model.lambda2;
    cfg.lambda_s = l.model.lambda_s;
    const auto rows = baseline_comparison(data, l.model.support, cfg, o.n, o.bootstrap, c.seed);
    auto csv = run.open("baselines.csv");
    csv << "baseline,log_volume,n_samples,n_inside,precision,half_width\n";
    json items = json::array();
    for (const auto& r : rows) {
      csv << to_string(r.kind) << ',' << r.log_volume << ',' << r.precision.n_samples << ','
          << r.precision.n_inside << ',' << r.precision.precision << ',' << r.precision.half_width << '\n';
      json j = to_json(r.precision);
      j["baseline"] = to_string(r.kind);
      j["log_volume"] = r.log_volume;
      items.push_back(std::move(j));
      std::cout << to_string(r.kind) << ": " << r.precision.precision << " +- " << r.precision.half_width << '\n';
    }
    run.write_json("baselines.json", items);
    run.manifest()["config"] = config_json(cfg);
    run.manifest()["config"]["n_samples"] = o.n;
    run.manifest()["config"]["bootstrap"] = o.bootstrap;
    run.finish();
    return 0;
  }
  const Ellipsoid e = ellipsoid_from_json(read_json_file(o.ellipsoid));
  const double theta = std::isfinite(o.theta) ? o.theta : e.provenance().theta;
  if (!std::isfinite(theta)) throw SpecError("no theta: pass --theta or use an ellipsoid with provenance");
  const GamObjective obj = GamObjective::for_support(data, l.model.support, l.model.lambda2, l.model.lambda_s);
  Rng rng(c.seed);
  const PrecisionEstimate p = estimate_precision(e, obj, theta, o.n, rng);
  json j = to_json(p);
  j["theta"] = theta;
  run.write_json("precision.json", j);
  run.finish();
  std::cout << "precision: " << p.precision << " +- " << p.half_width << " (n=" << p.n_samples << ")\n";
  return 0;
}

int cmd_tradeoff(const Common& c, const Opts& o) {
  Run run(c, "tradeoff");
  const Loaded l = load_model(o);
  const BinnedDataset data = load_binned(l);
  run.dataset(l.data_path);
  const Ellipsoid e = ellipsoid_from_json(read_json_file(o.ellipsoid));
  const double theta = std::isfinite(o.theta) ? o.theta : e.provenance().theta;
  if (!std::isfinite(theta)) throw SpecError("no theta: pass --theta or use an ellipsoid with provenance");
  const GamObjective obj = GamObjective::for_support(data, l.model.support, l.model.lambda2, l.model.lambda_s);
  const auto curve = tradeoff_curve(e, obj, theta, o.ratios, o.n, c.seed);
  auto csv = run.open("tradeoff.csv");
  csv << "rho,log_volume,precision,half_width\n";
  for (const auto& pt : curve) {
    csv << pt.rho << ',' << e.log_volume() + static_cast<double>(e.dim()) * std::log(pt.rho) << ','
        << pt.precision.precision << ',' << pt.precision.half_width << '\n';
  }
  run.manifest()["config"] = {{"ratios", o.ratios}, {"n_samples", o.n}, {"theta", theta}};
  run.finish();
  std::cout << "tradeoff: " << curve.size() << " points\n";
  return 0;
}

int cmd_ratios(const Common& c, const Opts& o) {
  Run run(c, "ratios");
  const Loaded l = load_model(o);
  const BinnedDataset data = load_binned(l);
  run.dataset(l.data_path);
  RashomonConfig cfg = rashomon_config(o);
  cfg.lambda2 = l.model.lambda2;
  cfg.lambda_s = l.model.lambda_s;
  if (o.k_tilde == 0) throw SpecError("--k-tilde is required");
  const RatioReport rep = method_ratio_report(data, l.model.support, o.k_tilde, o.plans, cfg, o.n, c.seed);
  auto csv = run.open("ratios.csv");
  csv << "plan,skipped,reason,precision1,precision2,precision_ratio,volume_ratio,time1_s,time2_s\n";
  std::size_t skipped = 0;
  for (const auto& r : rep.rows) {
    skipped += r.skipped;
    csv << '"' << r.plan.encode() << "\"," << r.skipped << ',' << r.reason << ',' << r.precision1 << ','
        << r.precision2 << ',' << r.precision_ratio << ',' << r.volume_ratio << ',' << r.time1 << ',' << r.time2
        << '\n';
  }
  run.manifest()["config"] = config_json(cfg);
  run.manifest()["config"]["k_tilde"] = o.k_tilde;
  run.manifest()["config"]["plans"] = o.plans;
  run.manifest()["config"]["n_samples"] = o.n;
  run.manifest()["loss_star_parent"] = rep.loss_star_parent;
  run.manifest()["delta"] = rep.delta;
  run.manifest()["theta_parent"] = rep.theta_parent;
  run.manifest()["skipped"] = skipped;
  run.finish();
  std::cout << "ratios: " << rep.rows.size() << " plans, " << skipped << " skipped\n";
  return 0;
}

int cmd_box(const Common& c, const Opts& o) {
  Run run(c, "box-volume");
  const Loaded l = load_model(o);
  const BinnedDataset data = load_binned(l);
  run.dataset(l.data_path);
  const Ellipsoid e = ellipsoid_from_json(read_json_file(o.ellipsoid));
  const double theta = std::isfinite(o.theta) ? o.theta : e.provenance().theta;
  if (!std::isfinite(theta)) throw SpecError("no theta: pass --theta or use an ellipsoid with provenance");
  const GamObjective obj = GamObjective::for_support(data, l.model.support, l.model.lambda2, l.model.lambda_s);
  const BoxVolume box = box_volume(obj, e.center(), theta, o.delta);
  auto csv = run.open("box.csv");
  csv << "coord,box_left,box_right,ellipsoid_left,ellipsoid_right\n";
  for (const auto& iv : box.intervals) {
    const auto j = static_cast<Eigen::Index>(iv.j);
    const double half = 1.0 / std::sqrt(e.Q()(j, j));
    csv << iv.j << ',' << iv.left << ',' << iv.right << ',' << e.center()(j) - half << ',' << e.center()(j) + half
        << '\n';
  }
  run.manifest()["log_box_volume"] = box.log_volume;
  run.manifest()["config"] = {{"delta", o.delta}, {"theta", theta}};
  run.finish();
  std::cout << "box-volume: log volume " << box.log_volume << '\n';
  return 0;
}

int cmd_serve(const Common&, const Opts& o) {
  Service svc(SessionState::load(o.model, o.ellipsoid));
  std::cout << "serving on http://" << o.host << ':' << o.port << "/api/ (ctrl-c to stop)" << std::endl;
  if (!svc.serve(o.host, o.port, o.cors)) {
    std::cerr << "error: could not bind " << o.host << ':' << o.port << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rashomon sets of sparse binned logistic GAMs"};
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  Opts o;
  app.add_option("--out", c.out, "Output directory")->capture_default_str();
  app.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", c.threads, "Worker threads (default: RASHGAM_THREADS or all cores)");

  auto existing = CLI::ExistingFile;
  auto add_model = [&](CLI::App* s) { s->add_option("--model", o.model, "model.json")->required()->check(existing); };
  auto add_ellipsoid = [&](CLI::App* s) {
    s->add_option("--ellipsoid", o.ellipsoid, "ellipsoid.json")->required()->check(existing);
  };
  auto add_data_override = [&](CLI::App* s) {
    s->add_option("--data", o.data, "CSV data (default: the model's data_path)")->check(existing);
  };
  auto add_optimizer = [&](CLI::App* s) {
    s->add_option("--theta", o.theta, "Absolute Rashomon threshold");
    s->add_option("--theta-mult", o.theta_mult, "theta = mult * L*")->capture_default_str()->check(
        CLI::Range(1.0, 1e9));
    s->add_option("--C", o.C, "Penalty weight")->capture_default_str();
    s->add_option("--lr", o.lr, "Learning rate")->capture_default_str();
    s->add_option("--iters", o.iters, "Optimizer iterations")->capture_default_str();
    s->add_option("--samples-per-iter", o.samples_per_iter, "Ball samples per iteration")->capture_default_str();
  };

  auto* fit = app.add_subcommand("fit", "Fit the ERM GAM on binned data");
  fit->add_option("--data", o.data, "CSV with header; last column is the 0/1 label")->required()->check(existing);
  fit->add_option("--bins", o.bins, "Max quantile bins per feature")->capture_default_str();
  fit->add_option("--lambda2", o.lambda2)->capture_default_str();
  fit->add_option("--lambdas", o.lambda_s)->capture_default_str();
  fit->add_option("--merge-tol", o.merge_tol, "Merge adjacent bins whose ERM coefficients differ by <= tol, then refit")
      ->capture_default_str();

  auto* rset = app.add_subcommand("rset", "Approximate the Rashomon set by an ellipsoid");
  add_model(rset);
  add_data_override(rset);
  add_optimizer(rset);

  auto* block = app.add_subcommand("block", "Rashomon sets of merged supports from a parent ellipsoid");
  add_model(block);
  add_ellipsoid(block);
  block->add_option("--k-tilde", o.k_tilde, "Coefficients after merging")->required();
  block->add_option("--plans", o.plans, "Plan limit (sampled beyond it)")->capture_default_str();

  auto* vi = app.add_subcommand("vi", "Variable importance ranges");
  add_model(vi);
  add_ellipsoid(vi);
  vi->add_flag("--fix-others", o.fix_others, "Hold other features at the center");

  auto* mono = app.add_subcommand("monotone", "Closest monotone model");
  add_model(mono);
  add_ellipsoid(mono);
  mono->add_option("--feature", o.feature, "Feature name or index")->required();
  mono->add_option("--direction", o.direction)->capture_default_str();
  mono->add_option("--also", o.also, "Additional feature:direction constraints");

  auto* proj = app.add_subcommand("project", "Project an edited model into the set");
  add_model(proj);
  add_ellipsoid(proj);
  proj->add_option("--request", o.request, "JSON with omega_req (runs or bins)")->required()->check(existing);

  auto* sample = app.add_subcommand("sample", "Uniform samples from an ellipsoid");
  add_ellipsoid(sample);
  sample->add_option("--n", o.n)->capture_default_str();

  auto* jumps = app.add_subcommand("jumps", "Jump prevalence between runs k and k+1");
  add_model(jumps);
  add_ellipsoid(jumps);
  jumps->add_option("--feature", o.feature)->required();
  jumps->add_option("--k", o.k, "Run boundary")->required();
  jumps->add_option("--n", o.n)->capture_default_str();
  jumps->add_option("--tau", o.tau)->capture_default_str();

  auto* prec = app.add_subcommand("precision", "Precision of an ellipsoid, or the baseline comparison");
  add_model(prec);
  add_data_override(prec);
  prec->add_option("--ellipsoid", o.ellipsoid, "ellipsoid.json")->check(existing);
  prec->add_option("--n", o.n)->capture_default_str();
  prec->add_flag("--baselines", o.baselines, "Fit and compare optimized, Hessian, sphere (and MVEE) ellipsoids");
  prec->add_option("--bootstrap", o.bootstrap, "Bootstrap models for the MVEE baseline (0 = skip)")
      ->capture_default_str();
  add_optimizer(prec);

  auto* trade = app.add_subcommand("tradeoff", "Precision versus rescaling factor");
  add_model(trade);
  add_ellipsoid(trade);
  add_data_override(trade);
  trade->add_option("--ratios", o.ratios)->capture_default_str();
  trade->add_option("--n", o.n)->capture_default_str();
  trade->add_option("--theta", o.theta);

  auto* ratios = app.add_subcommand("ratios", "Method 1 versus Method 2 on merged supports");
  add_model(ratios);
  add_data_override(ratios);
  ratios->add_option("--k-tilde", o.k_tilde)->required();
  ratios->add_option("--plans", o.plans)->capture_default_str();
  ratios->add_option("--n", o.n)->capture_default_str();
  add_optimizer(ratios);

  auto* box = app.add_subcommand("box-volume", "Coordinate box through the ellipsoid center by bisection");
  add_model(box);
  add_ellipsoid(box);
  add_data_override(box);
  box->add_option("--delta", o.delta)->capture_default_str();
  box->add_option("--theta", o.theta);

  auto* serve = app.add_subcommand("serve", "HTTP JSON service");
  add_model(serve);
  add_ellipsoid(serve);
  serve->add_option("--host", o.host)->capture_default_str();
  serve->add_option("--port", o.port)->capture_default_str();
  serve->add_option("--cors-origin", o.cors)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (prec->parsed() && !o.baselines && o.ellipsoid.empty()) {
    std::cerr << "precision: --ellipsoid is required unless --baselines is given\n";
    return 2;
  }
  if (c.threads > 0) set_max_threads(c.threads);

  try {
    if (fit->parsed()) return cmd_fit(c, o);
    if (rset->parsed()) return cmd_rset(c, o);
    if (block->parsed()) return cmd_block(c, o);
    if (vi->parsed()) return cmd_vi(c, o);
    if (mono->parsed()) return cmd_monotone(c, o);
    if (proj->parsed()) return cmd_project(c, o);
    if (sample->parsed()) return cmd_sample(c, o);
    if (jumps->parsed()) return cmd_jumps(c, o);
    if (prec->parsed()) return cmd_precision(c, o);
    if (trade->parsed()) return cmd_tradeoff(c, o);
    if (ratios->parsed()) return cmd_ratios(c, o);
    if (box->parsed()) return cmd_box(c, o);
    if (serve->parsed()) return cmd_serve(c, o);
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << '\n';
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error [data_error]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
