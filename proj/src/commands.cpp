#include "iterreg/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <ostream>
#include <thread>

#include "iterreg/errors.hpp"
#include "iterreg/random.hpp"

namespace iterreg {

namespace {

constexpr std::uint64_t kEvalStream = 0x6576616c;

std::ofstream open_output(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + p.string());
  return out;
}

Json vector_json(const VectorRef& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string("model: ") + what + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string("model: ") + what + " must hold numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

std::string mode_name(StepMode m) { return m == StepMode::smooth ? "smooth" : "nonsmooth"; }

Loss configured_loss(const RunConfig& cfg, const Sample& data) {
  Loss loss = loss_from_json(cfg.loss);
  if (!loss.is_classification() && !cfg.loss.contains("label_bound")) {
    loss = loss.with_label_bound(data.y.size() > 0 ? data.y.cwiseAbs().maxCoeff() : 0.0);
  }
  return loss;
}

// Fills iterates and their training risks from a finished run.
void collect_iterates(TrainOutcome& o, const GramMatrix& G, const Vector& y, const IterationState& state) {
  o.last = last_iterate(state);
  o.averaged = averaged_iterate(state);
  o.best = best_iterate(state);
  o.best_t = state.best_t;
  o.risk_last = empirical_risk_of_values(o.loss, G.entries * o.last, y);
  o.risk_averaged = empirical_risk_of_values(o.loss, G.entries * o.averaged, y);
  o.risk_best = state.best_risk;
}

// Runs body and maps the library's exceptions to exit codes.
template <class F>
int guarded(std::ostream& err, F body) {
  try {
    return body();
  } catch (const InadmissibleSchedule& e) {
    err << "inadmissible schedule: " << e.what() << "\n";
    return kExitInadmissible;
  } catch (const DivergenceError& e) {
    err << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "invalid parameter: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitConfig;
  }
}

const SyntheticData* synthetic(const RunConfig& cfg) { return std::get_if<SyntheticData>(&cfg.data); }

}  // namespace

Sample load_data(const RunConfig& cfg) {
  if (const auto* s = synthetic(cfg)) return sample(dist_from_json(s->dist), s->m, cfg.seed);
  return read_csv(std::get<CsvData>(cfg.data).path);
}

double effective_theta(const RunConfig& cfg) {
  if (const auto* t = std::get_if<TheoreticalStop>(&cfg.stopping)) {
    if (t->rule == TheoreticalStop::Rule::hinge_fixed) return hinge_fixed_T_schedule(t->beta, t->eps).theta;
  }
  return cfg.theta;
}

std::int64_t stopping_time(const RunConfig& cfg, const Loss& loss, double theta, Eigen::Index m) {
  if (const auto* f = std::get_if<FixedStop>(&cfg.stopping)) return f->T;
  if (const auto* h = std::get_if<HoldoutStop>(&cfg.stopping)) return h->T_max;
  const auto& t = std::get<TheoreticalStop>(cfg.stopping);
  double gamma = 0.0;
  switch (t.rule) {
    case TheoreticalStop::Rule::general: {
      const RegimeParams p{loss.growth_params().q, t.tau, t.beta, t.zeta, theta, cfg.mode == StepMode::smooth};
      gamma = compute_indices(p, t.iterate).gamma;
      break;
    }
    case TheoreticalStop::Rule::hinge:
      if (loss.kind() != LossKind::hinge) throw ConfigError("stopping.theoretical.rule: 'hinge' needs the hinge loss");
      gamma = hinge_indices(t.beta, theta).gamma;
      break;
    case TheoreticalStop::Rule::hinge_fixed:
      if (loss.kind() != LossKind::hinge) throw ConfigError("stopping.theoretical.rule: 'hinge_fixed' needs the hinge loss");
      gamma = hinge_fixed_T_schedule(t.beta, t.eps).gamma;
      break;
  }
  return theoretical_T(m, gamma);
}

TrainOutcome train(const RunConfig& cfg, const Sample& data) {
  const Kernel kernel = kernel_from_json(cfg.kernel, data.dim());
  const Loss loss = configured_loss(cfg, data);
  const double theta = effective_theta(cfg);
  const MatrixRef points(data.X);
  const KappaBound kb = kappa(kernel, &points, cfg.kappa);
  const StepSchedule sched = make_schedule(loss, kb.value, theta, cfg.eta1, cfg.mode, cfg.force);

  TrainOutcome o{kernel, loss, kb, sched, {}, {}, {}, {}, 0, 0, {}, false, {}, 0.0, 0.0, 0.0};
  RunOptions opts;
  opts.incremental = cfg.incremental;

  if (const auto* h = std::get_if<HoldoutStop>(&cfg.stopping)) {
    HoldoutResult hr = holdout_stop(kernel, data, loss, sched, h->T_max, h->split, cfg.seed, opts);
    const Sample train_part = subset(data, hr.train_index);
    const GramMatrix G = gram(kernel, train_part.X);
    const RunResult rerun = run(G, train_part.y, loss, sched, hr.t_star, opts);
    o.centers = train_part.X;
    o.t_star = hr.t_star;
    o.records = std::move(hr.run.records);
    o.holdout = true;
    o.train_index = std::move(hr.train_index);
    collect_iterates(o, G, train_part.y, rerun.state);
    return o;
  }

  const std::int64_t T = stopping_time(cfg, loss, theta, data.size());
  const GramMatrix G = gram(kernel, data.X);
  RunResult r = run(G, data.y, loss, sched, T, opts);
  o.centers = data.X;
  o.t_star = T;
  o.records = std::move(r.records);
  collect_iterates(o, G, data.y, r.state);
  return o;
}

void write_path_csv(std::ostream& out, const TrainOutcome& o) {
  const bool forced = !o.schedule.admissible;
  std::size_t columns = 5;
  out << "t,eta_t,empirical_risk,rkhs_norm,subgrad_norm";
  if (o.holdout) {
    out << ",validation_risk";
    ++columns;
  }
  if (forced) {
    out << ",forced";
    ++columns;
  }
  out << '\n';
  for (const auto& r : o.records) {
    out << r.t << ',' << format_double(r.eta) << ',' << format_double(r.empirical_risk) << ','
        << format_double(r.rkhs_norm) << ',' << format_double(r.subgrad_norm);
    if (o.holdout) out << ',' << (r.validation_risk ? format_double(*r.validation_risk) : "");
    if (forced) out << ',' << (r.forced ? 1 : 0);
    out << '\n';
  }
  if (o.holdout) out << "stop," << o.t_star << std::string(columns - 2, ',') << '\n';
}

Json model_to_json(const TrainOutcome& o) {
  Json centers = Json::array();
  for (Eigen::Index i = 0; i < o.centers.rows(); ++i) centers.push_back(vector_json(o.centers.row(i).transpose()));
  return Json{
      {"kernel", kernel_to_json(o.kernel)},
      {"loss", loss_to_json(o.loss)},
      {"kappa", {{"value", o.kappa.value}, {"provenance", to_string(o.kappa.provenance)}}},
      {"schedule",
       {{"eta1", o.schedule.eta1},
        {"theta", o.schedule.theta},
        {"mode", mode_name(o.schedule.mode)},
        {"admissible", o.schedule.admissible}}},
      {"iterations", o.t_star},
      {"best_t", o.best_t},
      {"centers", centers},
      {"coefficients", {{"last", vector_json(o.last)}, {"averaged", vector_json(o.averaged)}, {"best", vector_json(o.best)}}},
      {"training_risk", {{"last", o.risk_last}, {"averaged", o.risk_averaged}, {"best", o.risk_best}}},
  };
}

LoadedModel load_model(const Json& doc) {
  if (!doc.is_object() || !doc.contains("centers") || !doc.contains("coefficients") || !doc.contains("kernel") ||
      !doc.contains("loss")) {
    throw ConfigError("model: needs kernel, loss, centers and coefficients");
  }
  const Json& cj = doc.at("centers");
  if (!cj.is_array() || cj.empty()) throw ConfigError("model: centers must be a nonempty array");
  Matrix centers(static_cast<Eigen::Index>(cj.size()), static_cast<Eigen::Index>(cj[0].size()));
  for (std::size_t i = 0; i < cj.size(); ++i) {
    const Vector row = vector_from_json(cj[i], "centers");
    if (row.size() != centers.cols()) throw ConfigError("model: centers differ in dimension");
    centers.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  const Json& co = doc.at("coefficients");
  LoadedModel m{kernel_from_json(doc.at("kernel"), centers.cols()),
                loss_from_json(doc.at("loss")),
                std::move(centers),
                vector_from_json(co.at("last"), "coefficients.last"),
                vector_from_json(co.at("averaged"), "coefficients.averaged"),
                vector_from_json(co.at("best"), "coefficients.best")};
  for (const Vector* v : {&m.last, &m.averaged, &m.best}) {
    if (v->size() != m.centers.rows()) throw ConfigError("model: coefficient length does not match the centers");
  }
  return m;
}

LoadedModel load_model(const std::filesystem::path& path) { return load_model(load_json_file(path)); }

Json risk_reports(const TrainOutcome& o, const SyntheticDist& dist, std::int64_t mc_samples, std::uint64_t seed) {
  Matrix coeffs(o.centers.rows(), 3);
  coeffs << o.last, o.averaged, o.best;
  const MultiPredictor f = [&](const MatrixRef& X) -> Matrix { return predict_many(o.kernel, o.centers, coeffs, X); };
  const TargetRisk target = target_risk(dist, o.loss);
  std::vector<McEstimate> risks;
  std::vector<McEstimate> mis;
  if (dist.is_classification()) {
    RiskAndError both = risk_and_misclassification_mc(o.loss, f, 3, dist, mc_samples, seed);
    risks = std::move(both.risk);
    mis = std::move(both.misclassification);
  } else {
    risks = expected_risk_mc(o.loss, f, 3, dist, mc_samples, seed);
  }
  const char* names[] = {"last", "averaged", "best"};
  const double train_risks[] = {o.risk_last, o.risk_averaged, o.risk_best};
  Json out = Json::object();
  for (std::size_t j = 0; j < 3; ++j) {
    RiskReport r;
    r.empirical_risk = train_risks[j];
    r.expected_risk = risks[j].estimate;
    r.expected_risk_stderr = risks[j].stderr_;
    r.excess_risk = risks[j].estimate - target.value;
    if (!mis.empty()) r.misclassification_rate = mis[j].estimate;
    r.mc_samples = mc_samples;
    out[names[j]] = r.to_json();
  }
  return out;
}

int cmd_train(const RunConfig& cfg, std::ostream& err) {
  return guarded(err, [&] {
    const Sample data = load_data(cfg);
    const TrainOutcome o = train(cfg, data);
    if (cfg.outputs.path_csv) {
      std::ofstream out = open_output(*cfg.outputs.path_csv);
      write_path_csv(out, o);
    }
    if (cfg.outputs.model_json) {
      std::ofstream out = open_output(*cfg.outputs.model_json);
      out << dump_json(model_to_json(o)) << '\n';
    }
    if (const auto* s = synthetic(cfg); s && cfg.outputs.report_json) {
      const Json reports = risk_reports(o, dist_from_json(s->dist), cfg.mc_samples, derive_seed(cfg.seed, kEvalStream));
      std::ofstream out = open_output(*cfg.outputs.report_json);
      out << dump_json(reports) << '\n';
    }
    return kExitOk;
  });
}

int cmd_indices(const IndicesRequest& req, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Json j;
    double gamma = 0.0;
    switch (req.rule) {
      case IndicesRequest::Rule::general: {
        const RateIndices r = compute_indices(req.params, req.iterate);
        gamma = r.gamma;
        j = {{"gamma", r.gamma}, {"alpha", r.alpha}, {"has_log_factor", r.has_log_factor}};
        break;
      }
      case IndicesRequest::Rule::hinge: {
        const RateIndices r = hinge_indices(req.params.beta, req.params.theta);
        gamma = r.gamma;
        j = {{"gamma", r.gamma}, {"alpha", r.alpha}, {"has_log_factor", r.has_log_factor}};
        break;
      }
      case IndicesRequest::Rule::hinge_fixed: {
        const FixedTSchedule s = hinge_fixed_T_schedule(req.params.beta, req.eps);
        const RateIndices r = hinge_indices(req.params.beta, s.theta);
        gamma = s.gamma;
        j = {{"theta", s.theta}, {"gamma", s.gamma}, {"alpha", r.alpha}, {"has_log_factor", false}};
        break;
      }
    }
    if (req.m) j["T"] = theoretical_T(*req.m, gamma);
    out << dump_json(j) << '\n';
    return kExitOk;
  });
}

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("loglog_slope: x and y differ in length");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) pts.emplace_back(std::log(x[i]), std::log(y[i]));
  }
  if (pts.size() < 2) return std::nullopt;
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [a, b] : pts) {
    mx += a;
    my += b;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& [a, b] : pts) {
    sxy += (a - mx) * (b - my);
    sxx += (a - mx) * (a - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

RatesResult run_rates(const RunConfig& cfg) {
  if (!cfg.rates) throw ConfigError("rates: missing");
  const auto* syn = synthetic(cfg);
  if (syn == nullptr) throw ConfigError("rates: data must be synthetic");
  const SyntheticDist dist = dist_from_json(syn->dist);
  const RatesConfig& rc = *cfg.rates;
  const char* variants[] = {"last", "averaged", "best"};

  struct Cell {
    Eigen::Index m;
    int rep;
  };
  std::vector<Cell> cells;
  for (Eigen::Index m : rc.m_grid) {
    for (int rep = 0; rep < rc.repetitions; ++rep) cells.push_back({m, rep});
  }
  std::vector<std::vector<RatesRow>> results(cells.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    SerialScope serial;
    for (std::size_t i = next++; i < cells.size() && !failed; i = next++) {
      try {
        const Cell c = cells[i];
        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t seed =
            derive_seed(cfg.seed, static_cast<std::uint64_t>(c.m), static_cast<std::uint64_t>(c.rep));
        RunConfig cell_cfg = cfg;
        cell_cfg.seed = seed;
        const Sample data = sample(dist, c.m, seed);
        const TrainOutcome o = train(cell_cfg, data);
        const Json reports = risk_reports(o, dist, cfg.mc_samples, derive_seed(seed, kEvalStream));
        const double bayes = dist.is_classification() ? dist.bayes_risk().value : 0.0;
        const double wall =
            rc.timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() : 0.0;
        for (const char* v : variants) {
          const Json& r = reports.at(v);
          RatesRow row;
          row.m = c.m;
          row.repetition = c.rep;
          row.variant = v;
          row.T = static_cast<std::int64_t>(o.records.size());
          row.excess_risk = r.at("excess_risk").get<double>();
          row.stderr_ = r.at("expected_risk_stderr").get<double>();
          if (!r.at("misclassification_rate").is_null()) {
            row.excess_misclassification = r.at("misclassification_rate").get<double>() - bayes;
          }
          row.t_star = o.t_star;
          row.wall_time_s = wall;
          results[i].push_back(row);
        }
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  const unsigned threads = std::min<unsigned>(worker_threads(), static_cast<unsigned>(cells.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  RatesResult out;
  for (auto& r : results) out.rows.insert(out.rows.end(), r.begin(), r.end());

  Json medians = Json::object();
  Json mis_medians = Json::object();
  Json slopes = Json::object();
  std::vector<double> ms(rc.m_grid.begin(), rc.m_grid.end());
  for (const char* v : variants) {
    std::vector<double> med;
    std::vector<double> mis_med;
    for (Eigen::Index m : rc.m_grid) {
      std::vector<double> ex;
      std::vector<double> mx;
      for (const auto& row : out.rows) {
        if (row.m != m || row.variant != v) continue;
        ex.push_back(row.excess_risk);
        if (row.excess_misclassification) mx.push_back(*row.excess_misclassification);
      }
      med.push_back(median(ex));
      if (!mx.empty()) mis_med.push_back(median(mx));
    }
    medians[v] = med;
    if (!mis_med.empty()) mis_medians[v] = mis_med;
    const auto slope = loglog_slope(ms, med);
    slopes[v] = slope ? Json(*slope) : Json(nullptr);
  }
  out.summary = {{"m_grid", rc.m_grid},
                 {"repetitions", rc.repetitions},
                 {"median_excess_risk", medians},
                 {"slope", slopes}};
  if (!mis_medians.empty()) out.summary["median_excess_misclassification"] = mis_medians;
  return out;
}

void write_rates_csv(std::ostream& out, const std::vector<RatesRow>& rows) {
  out << "m,repetition,variant,T,excess_risk,stderr,excess_misclassification,t_star,wall_time_s\n";
  for (const auto& r : rows) {
    out << r.m << ',' << r.repetition << ',' << r.variant << ',' << r.T << ',' << format_double(r.excess_risk) << ','
        << format_double(r.stderr_) << ','
        << (r.excess_misclassification ? format_double(*r.excess_misclassification) : "") << ',' << r.t_star << ','
        << format_double(r.wall_time_s) << '\n';
  }
}

int cmd_rates(const RunConfig& cfg, std::ostream& err) {
  return guarded(err, [&] {
    const RatesResult r = run_rates(cfg);
    if (cfg.rates->csv) {
      std::ofstream out = open_output(*cfg.rates->csv);
      write_rates_csv(out, r.rows);
    }
    if (cfg.rates->summary_json) {
      std::ofstream out = open_output(*cfg.rates->summary_json);
      out << dump_json(r.summary) << '\n';
    }
    return kExitOk;
  });
}

int cmd_sample(const Json& dist_spec, Eigen::Index m, std::uint64_t seed, const std::filesystem::path& out_path,
               std::ostream& err) {
  return guarded(err, [&] {
    const SyntheticDist dist = dist_from_json(dist_spec);
    std::ofstream out = open_output(out_path);
    write_csv(out, sample(dist, m, seed));
    return kExitOk;
  });
}

}  // namespace iterreg
