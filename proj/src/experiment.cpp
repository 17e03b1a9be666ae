#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "markovsa/harness.hpp"
#include "markovsa/version.hpp"

namespace markovsa {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_double(double v) {
  if (std::isnan(v)) {
    return "";
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// mean of the non-NaN entries; NaN when none
double nan_mean(const std::vector<double>& xs) {
  double sum = 0.0;
  long count = 0;
  for (double x : xs) {
    if (!std::isnan(x)) {
      sum += x;
      ++count;
    }
  }
  return count > 0 ? sum / static_cast<double>(count)
                   : std::numeric_limits<double>::quiet_NaN();
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) {
    s += x;
  }
  return xs.empty() ? std::numeric_limits<double>::quiet_NaN()
                    : s / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
  if (xs.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) {
    s += (x - m) * (x - m);
  }
  return std::sqrt(s / static_cast<double>(xs.size()));
}

// mean over the first / last tenth of the non-NaN entries, in order
std::pair<double, double> decile_means(const std::vector<double>& xs) {
  std::vector<double> present;
  present.reserve(xs.size());
  for (double x : xs) {
    if (!std::isnan(x)) {
      present.push_back(x);
    }
  }
  if (present.empty()) {
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  const std::size_t n10 = std::max<std::size_t>(1, present.size() / 10);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < n10; ++i) {
    first += present[i];
    last += present[present.size() - 1 - i];
  }
  return {first / static_cast<double>(n10), last / static_cast<double>(n10)};
}

void write_record_csv(const RunRecord& rec, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("experiment: cannot write '" + path + "'");
  }
  out << "k,eta,t_k,loss,V_hat,fw_gap,sfo_calls,lmo_calls\n";
  for (std::size_t i = 0; i < rec.eta.size(); ++i) {
    out << (i + 1) << ',' << fmt_double(rec.eta[i]) << ',';
    if (rec.t_inner[i] > 0) {
      out << rec.t_inner[i];
    }
    out << ',' << fmt_double(rec.loss[i]) << ',' << fmt_double(rec.v_hat[i])
        << ',' << fmt_double(rec.fw_gap_hat[i]) << ',' << rec.sfo_calls_cum[i]
        << ',' << rec.lmo_calls_cum[i] << "\n";
  }
}

void write_aggregate_csv(const std::vector<RunRecord>& records,
                         const std::string& path) {
  const auto curves = aggregate_mean_curves(records);
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("experiment: cannot write '" + path + "'");
  }
  out << "k,eta,t_k,loss,V_hat,fw_gap,sfo_calls,lmo_calls\n";
  const std::size_t n = curves[0].size();
  for (std::size_t i = 0; i < n; ++i) {
    out << (i + 1);
    for (const auto& col : curves) {
      out << ',' << fmt_double(col[i]);
    }
    out << "\n";
  }
}

RepetitionSummary summarize_rep(int rep, std::uint64_t seed,
                                const RunRecord& rec) {
  RepetitionSummary s;
  s.rep = rep;
  s.seed = seed;
  s.aborted = rec.aborted;
  s.abort_reason = rec.abort_reason;
  s.output_index = rec.output_index;
  s.sfo_calls = rec.sfo_calls;
  s.lmo_calls = rec.lmo_calls;
  s.projection_calls = rec.projection_calls;
  s.v_out = rec.v_out;
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  s.final_loss = rec.loss.empty() ? nan : rec.loss.back();
  s.final_v_hat = rec.v_hat.empty() ? nan : rec.v_hat.back();
  std::tie(s.loss_first_decile, s.loss_last_decile) = decile_means(rec.loss);
  std::tie(s.v_hat_first_decile, s.v_hat_last_decile) =
      decile_means(rec.v_hat);
  return s;
}

json rep_to_json(const RepetitionSummary& s) {
  json j;
  j["rep"] = s.rep;
  j["seed"] = s.seed;
  j["final_loss"] = s.final_loss;
  j["final_v_hat"] = s.final_v_hat;
  j["v_out"] = s.v_out;
  j["loss_first_decile"] = s.loss_first_decile;
  j["loss_last_decile"] = s.loss_last_decile;
  j["v_hat_first_decile"] = s.v_hat_first_decile;
  j["v_hat_last_decile"] = s.v_hat_last_decile;
  j["output_index"] = s.output_index;
  j["sfo_calls"] = s.sfo_calls;
  j["lmo_calls"] = s.lmo_calls;
  j["projection_calls"] = s.projection_calls;
  j["aborted"] = s.aborted;
  if (s.aborted) {
    j["abort_reason"] = s.abort_reason;
  }
  return j;
}

void fill_aggregates(SummaryReport& report) {
  std::vector<double> fl, fv, vo, lfd, lld, vfd, vld;
  for (const auto& r : report.reps) {
    if (r.aborted) {
      continue;
    }
    fl.push_back(r.final_loss);
    fv.push_back(r.final_v_hat);
    vo.push_back(r.v_out);
    lfd.push_back(r.loss_first_decile);
    lld.push_back(r.loss_last_decile);
    vfd.push_back(r.v_hat_first_decile);
    vld.push_back(r.v_hat_last_decile);
  }
  report.mean_final_loss = nan_mean(fl);
  report.std_final_loss = std_of(fl);
  report.mean_final_v_hat = nan_mean(fv);
  report.std_final_v_hat = std_of(fv);
  report.mean_v_out = nan_mean(vo);
  report.std_v_out = std_of(vo);
  report.mean_loss_first_decile = nan_mean(lfd);
  report.mean_loss_last_decile = nan_mean(lld);
  report.mean_v_hat_first_decile = nan_mean(vfd);
  report.mean_v_hat_last_decile = nan_mean(vld);
}

std::vector<RunRecord> run_repetitions(const ExperimentConfig& config,
                                       int horizon) {
  const int reps = config.repetitions;
  const FeasibleSet set = config.make_set();
  std::vector<RunRecord> records(static_cast<std::size_t>(reps));

  int nthreads = config.threads > 0
                     ? config.threads
                     : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::max(1, std::min(nthreads, reps));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
      const std::uint64_t seed = rep_seed(config.master_seed, r);
      auto& rec = records[static_cast<std::size_t>(r)];
      try {
        auto oracle = config.make_oracle();
        const RunConfig rc = config.make_run_config(horizon, seed, set);
        rec = iasa_run(*oracle, set, rc, config.probe);
      } catch (const std::exception& e) {
        rec.aborted = true;
        rec.abort_reason = e.what();
      }
    }
  };

  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) {
      pool.emplace_back(worker);
    }
    for (auto& t : pool) {
      t.join();
    }
  }
  return records;
}

}  // namespace

std::vector<std::vector<double>> aggregate_mean_curves(
    const std::vector<RunRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("aggregate: no records");
  }
  const std::size_t n = records[0].eta.size();
  // columns follow the CSV schema after k
  std::vector<std::vector<double>> cols(
      7, std::vector<double>(n, std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> eta, t, loss, v, fw, sfo, lmo;
    for (const auto& rec : records) {
      if (rec.eta.size() != n) {
        throw std::invalid_argument("aggregate: record length mismatch");
      }
      eta.push_back(rec.eta[i]);
      if (rec.t_inner[i] > 0) {
        t.push_back(static_cast<double>(rec.t_inner[i]));
      }
      loss.push_back(rec.loss[i]);
      v.push_back(rec.v_hat[i]);
      fw.push_back(rec.fw_gap_hat[i]);
      sfo.push_back(static_cast<double>(rec.sfo_calls_cum[i]));
      lmo.push_back(static_cast<double>(rec.lmo_calls_cum[i]));
    }
    cols[0][i] = mean_of(eta);
    cols[1][i] = t.empty() ? std::numeric_limits<double>::quiet_NaN()
                           : mean_of(t);
    cols[2][i] = nan_mean(loss);
    cols[3][i] = nan_mean(v);
    cols[4][i] = nan_mean(fw);
    cols[5][i] = mean_of(sfo);
    cols[6][i] = mean_of(lmo);
  }
  return cols;
}

std::string effective_output_dir(const ExperimentConfig& config) {
  if (const char* env = std::getenv("MARKOVSA_OUTPUT_DIR")) {
    if (env[0] != '\0') {
      return env;
    }
  }
  return config.output_dir;
}

json SummaryReport::to_json() const {
  json j;
  j["tool"] = {{"name", "markovsa"}, {"version", kVersion}};
  j["config"] = config_echo;
  json reps_json = json::array();
  for (const auto& r : reps) {
    reps_json.push_back(rep_to_json(r));
  }
  j["repetitions"] = reps_json;
  j["aggregate"] = {
      {"mean_final_loss", mean_final_loss},
      {"std_final_loss", std_final_loss},
      {"mean_final_v_hat", mean_final_v_hat},
      {"std_final_v_hat", std_final_v_hat},
      {"mean_v_out", mean_v_out},
      {"std_v_out", std_v_out},
      {"mean_loss_first_decile", mean_loss_first_decile},
      {"mean_loss_last_decile", mean_loss_last_decile},
      {"mean_v_hat_first_decile", mean_v_hat_first_decile},
      {"mean_v_hat_last_decile", mean_v_hat_last_decile},
  };
  if (!sweep_points.empty()) {
    json n_list = json::array(), v_list = json::array();
    for (const auto& p : sweep_points) {
      n_list.push_back(p.N);
      v_list.push_back(p.mean_v_out);
    }
    j["sweep"] = {{"N", n_list}, {"mean_v_out", v_list}};
    j["sweep"]["slope"] = sweep_slope ? json(*sweep_slope) : json(nullptr);
  }
  return j;
}

SummaryReport run_experiment(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string outdir = effective_output_dir(config);
  fs::create_directories(outdir);

  const auto records = run_repetitions(config, config.N);

  SummaryReport report;
  report.config_echo = config.echo;
  for (int r = 0; r < config.repetitions; ++r) {
    const auto& rec = records[static_cast<std::size_t>(r)];
    report.reps.push_back(
        summarize_rep(r, rep_seed(config.master_seed, r), rec));
    char name[64];
    std::snprintf(name, sizeof(name), "rep_%03d.csv", r);
    write_record_csv(rec, (fs::path(outdir) / name).string());
  }
  write_aggregate_csv(records, (fs::path(outdir) / "aggregate.csv").string());
  fill_aggregates(report);

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  std::ofstream out(fs::path(outdir) / "summary.json");
  out << report.to_json().dump(2) << "\n";
  return report;
}

SummaryReport sweep(const ExperimentConfig& config,
                    const std::vector<int>& n_grid) {
  if (n_grid.empty()) {
    throw std::invalid_argument("sweep: empty grid");
  }
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) {
      throw std::invalid_argument("sweep: grid must be increasing");
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::string outdir = effective_output_dir(config);
  fs::create_directories(outdir);

  SummaryReport report;
  report.config_echo = config.echo;

  for (int n : n_grid) {
    ExperimentConfig point = config;
    point.N = n;
    if (point.echo.contains("run")) {
      point.echo["run"]["N"] = n;
    }
    point.output_dir = (fs::path(outdir) / ("N_" + std::to_string(n))).string();
    // sub-runs write inside the already-resolved output directory rather
    // than re-reading the environment override
    fs::create_directories(point.output_dir);
    const auto records = run_repetitions(point, n);
    std::vector<double> v_outs;
    SummaryReport sub;
    sub.config_echo = point.echo;
    for (int r = 0; r < point.repetitions; ++r) {
      const auto& rec = records[static_cast<std::size_t>(r)];
      sub.reps.push_back(
          summarize_rep(r, rep_seed(point.master_seed, r), rec));
      if (!rec.aborted && !std::isnan(rec.v_out)) {
        v_outs.push_back(rec.v_out);
      }
      char name[64];
      std::snprintf(name, sizeof(name), "rep_%03d.csv", r);
      write_record_csv(rec, (fs::path(point.output_dir) / name).string());
    }
    write_aggregate_csv(records,
                        (fs::path(point.output_dir) / "aggregate.csv").string());
    fill_aggregates(sub);
    std::ofstream sub_out(fs::path(point.output_dir) / "summary.json");
    sub_out << sub.to_json().dump(2) << "\n";

    report.sweep_points.push_back(SweepPoint{n, nan_mean(v_outs)});
  }

  if (report.sweep_points.size() >= 2) {
    std::vector<std::pair<double, double>> pairs;
    bool ok = true;
    for (const auto& p : report.sweep_points) {
      if (!(p.mean_v_out > 0.0)) {
        ok = false;
        break;
      }
      pairs.emplace_back(static_cast<double>(p.N), p.mean_v_out);
    }
    if (ok) {
      report.sweep_slope = fit_loglog_slope(pairs);
    }
  }
  fill_aggregates(report);

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::ofstream out(fs::path(outdir) / "summary.json");
  out << report.to_json().dump(2) << "\n";
  return report;
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) {
    throw std::invalid_argument("fit_loglog_slope: need at least two points");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(pairs.size());
  for (const auto& [N, V] : pairs) {
    if (!(N > 0.0) || !(V > 0.0)) {
      throw std::invalid_argument("fit_loglog_slope: inputs must be positive");
    }
    const double x = std::log(N), y = std::log(V);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace markovsa
