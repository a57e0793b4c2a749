#pragma once

// Command-line front end. Exit codes: 0 when every criterion passed, 1 when
// a criterion failed (the report is still written) or a computation failed,
// 2 for usage and configuration errors.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lpball/analytic.hpp"
#include "lpball/config.hpp"
#include "lpball/errors.hpp"
#include "lpball/experiments.hpp"
#include "lpball/ratefn.hpp"
#include "lpball/report.hpp"
#include "lpball/sampling.hpp"

namespace lpball {

namespace detail {

// Raw flag values for an experiment subcommand; applied through
// apply_setting so flags and config files share one parser.
struct ExperimentFlags {
  ExperimentKind kind{};
  CLI::App* app = nullptr;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> order;  // key -> option name
  std::map<std::string, std::string> values;
  std::string output = "-";
  std::string format;
  bool dry_run = false;
  bool timing = false;
};

inline void add_experiment_options(ExperimentFlags& f) {
  auto* app = f.app;
  app->add_option("--config,-c", f.config_path, "INI file; [common] and [" + std::string(to_string(f.kind)) + "] are read");
  auto add = [&](const std::string& key, const std::string& names, const std::string& help) {
    app->add_option(names, f.values[key], help);
    f.order.emplace_back(key, names.substr(0, names.find(',')));
  };
  add("p", "--p", "exponent p (decimal or inf)");
  add("q", "--q", "comma-separated exponents q");
  add("n", "--n", "dimension");
  add("samples", "--samples,-N", "number of sampled points");
  add("seed", "--seed", "64-bit seed");
  add("workers", "--workers", "worker threads");
  add("measure", "--measure", "uniform or cone");
  add("grid", "--grid,--t,--r,--z,--s", "per-experiment grid (A_pq t, r, z, or s values)");
  add("alphas", "--alphas,--alpha", "alpha values for neighbors");
  add("n_grid", "--n-grid", "comma-separated dimensions for trend and ldp runs");
  add("trend_samples", "--trend-samples", "sampled points per trend dimension");
  app->add_option("--output,-o", f.output, "output path, - for stdout");
  app->add_option("--format", f.format, "csv or json (default: from the output extension, else csv)")
      ->check(CLI::IsMember({"csv", "json"}));
  app->add_flag("--dry-run", f.dry_run, "print the effective configuration and exit");
  app->add_flag("--timing", f.timing, "record wall time (JSON field, stderr for CSV)");
}

inline ExperimentConfig effective_config(const ExperimentFlags& f) {
  ExperimentConfig c = default_config(f.kind);
  if (!f.config_path.empty()) load_config_file(c, f.config_path);
  apply_seed_env(c);
  for (const auto& [key, name] : f.order) {
    if (f.app->count(name) > 0) apply_setting(c, key, f.values.at(key));
  }
  validate(c);
  return c;
}

inline ReportFormat choose_format(const ExperimentFlags& f) {
  if (f.format == "json") return ReportFormat::json;
  if (f.format == "csv") return ReportFormat::csv;
  const auto& o = f.output;
  if (o.size() >= 5 && o.compare(o.size() - 5, 5, ".json") == 0) return ReportFormat::json;
  return ReportFormat::csv;
}

inline std::string format_value(double x) { return format_number(x); }

inline void print_values(std::ostream& out, const nlohmann::ordered_json& j, bool json) {
  if (json) {
    out << j.dump(2) << '\n';
    return;
  }
  for (const auto& [key, value] : j.items()) {
    if (value.is_number_float()) {
      out << key << " = " << format_value(value.get<double>()) << '\n';
    } else if (value.is_string()) {
      out << key << " = " << value.get<std::string>() << '\n';
    } else {
      out << key << " = " << value.dump() << '\n';
    }
  }
}

inline nlohmann::ordered_json number_or_inf(const ExtendedReal& x) {
  if (x.is_infinite()) return "inf";
  return x.value();
}

}  // namespace detail

inline int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                              std::ostream& err = std::cerr) {
  CLI::App app{"Simulation and numerics for uniform points of l_p^n balls", "lpball"};
  app.require_subcommand(1);

  // constants
  std::string c_p, c_q, c_r, c_n;
  bool c_json = false;
  auto* constants = app.add_subcommand("constants", "moments, covariances, intersection and Gumbel constants");
  constants->add_option("--p", c_p, "exponent p")->required();
  constants->add_option("--q", c_q, "exponent q");
  constants->add_option("--r", c_r, "moment order r");
  constants->add_option("--n", c_n, "dimension");
  constants->add_flag("--json", c_json, "print JSON instead of key = value lines");

  // sample
  std::string s_p = "2", s_n = "3", s_count = "1", s_seed = "1", s_stream = "0", s_measure = "uniform";
  auto* sample = app.add_subcommand("sample", "print sampled points, one per line");
  sample->add_option("--p", s_p, "exponent p");
  sample->add_option("--n", s_n, "dimension");
  sample->add_option("--count", s_count, "number of points");
  sample->add_option("--seed", s_seed, "64-bit seed");
  sample->add_option("--stream", s_stream, "stream id");
  sample->add_option("--measure", s_measure, "uniform or cone");

  // rate
  std::string r_p, r_q, r_z, r_scale = "power_mean", r_of = "log_mgf";
  bool r_json = false;
  auto* rate = app.add_subcommand("rate", "evaluate a large-deviation rate function");
  rate->add_option("--p", r_p, "exponent p")->required();
  rate->add_option("--q", r_q, "exponent q")->required();
  rate->add_option("--z", r_z, "comma-separated evaluation points")->required();
  rate->add_option("--scale", r_scale, "p = inf only: power_mean or norm")
      ->check(CLI::IsMember({"power_mean", "norm"}));
  rate->add_option("--conjugate-of", r_of, "p = inf only: log_mgf or mgf (mgf is for comparison)")
      ->check(CLI::IsMember({"log_mgf", "mgf"}));
  rate->add_flag("--json", r_json, "print JSON instead of key = value lines");

  std::vector<std::unique_ptr<detail::ExperimentFlags>> experiments;
  const std::vector<std::pair<ExperimentKind, std::string>> kinds{
      {ExperimentKind::clt, "multivariate CLT for q-norms"},
      {ExperimentKind::noncentral, "exponential limit of n (1 - ||Z||_p)"},
      {ExperimentKind::gumbel, "Gumbel limit of the max-norm"},
      {ExperimentKind::intersect, "volume of D_p^n cap t D_q^n"},
      {ExperimentKind::window, "critical window of the intersection"},
      {ExperimentKind::multi_intersect, "intersection with two q-balls"},
      {ExperimentKind::neighbors, "intersection with neighbouring balls q = p + alpha / log n"},
      {ExperimentKind::project, "length of a random 1-D projection of B_q^n"},
      {ExperimentKind::ldp, "empirical large-deviation tails"},
      {ExperimentKind::disjoint, "P(||Z||_q <= 1) for q < p along dimensions"},
  };
  for (const auto& [kind, help] : kinds) {
    auto f = std::make_unique<detail::ExperimentFlags>();
    f->kind = kind;
    f->app = app.add_subcommand(to_string(kind), help);
    detail::add_experiment_options(*f);
    experiments.push_back(std::move(f));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*constants) {
      const Exponent p = parse_exponent(c_p);
      nlohmann::ordered_json j;
      j["p"] = p.to_string();
      if (!c_r.empty()) {
        const double r = detail::parse_real("r", c_r);
        j["M_p(r)"] = moment(p, r);
        j["C_p(r,r)"] = covariance_pair(p, r, r);
      }
      if (!c_q.empty()) {
        const Exponent q = parse_exponent(c_q);
        j["q"] = q.to_string();
        if (q.is_finite()) {
          j["M_p(q)"] = moment(p, q.value());
          if (!(q == p)) {
            const std::vector<Exponent> qs{q};
            j["c_11"] = clt_covariance(p, qs)(0, 0);
            const auto k = intersection_constants(p, q, c_n.empty() ? 1 : static_cast<long long>(parse_count("n", c_n)));
            j["m_pq"] = k.m_pq;
            j["A_pq"] = k.a_pq_limit;
            j["c_p"] = k.c_p_limit;
            if (!c_n.empty()) {
              j["c_pn"] = k.c_pn;
              j["c_qn"] = k.c_qn;
              j["A_pqn"] = k.a_pqn;
            }
          }
        }
        if (q.is_infinite() || (q.value() > 1.0 && q.value() != 2.0)) j["sigma_q^2"] = projection_variance(q);
      }
      if (!c_n.empty()) {
        const auto n = static_cast<long long>(parse_count("n", c_n));
        if (n < 1) throw ConfigError("n", "must be >= 1");
        j["n"] = n;
        j["log_vol"] = log_ball_volume(p, n);
        if (p.is_finite() && n >= 2) {
          const auto g = gumbel_norms(p, n);
          j["gumbel_c_n"] = g.c_n;
          j["gumbel_d_n"] = g.d_n;
          j["gumbel_a_n"] = g.a_n;
          j["gumbel_K"] = g.k;
        }
      }
      detail::print_values(out, j, c_json);
      return 0;
    }

    if (*sample) {
      const Exponent p = parse_exponent(s_p);
      const auto n = parse_count("n", s_n);
      const auto count = parse_count("count", s_count);
      const Measure m = parse_measure(s_measure);
      if (n < 1) throw ConfigError("n", "must be >= 1");
      if (m == Measure::cone_boundary && p.is_infinite()) throw ConfigError("measure", "cone requires p < inf");
      RngStream rng(parse_count("seed", s_seed), parse_count("stream", s_stream));
      std::vector<double> z(n);
      for (std::uint64_t k = 0; k < count; ++k) {
        sample_into(rng, p, m, z);
        for (std::size_t i = 0; i < z.size(); ++i) out << (i ? "," : "") << detail::format_number(z[i]);
        out << '\n';
      }
      return 0;
    }

    if (*rate) {
      const Exponent p = parse_exponent(r_p);
      const Exponent q = parse_exponent(r_q);
      const auto zs = parse_real_list("z", r_z);
      if (zs.empty()) throw ConfigError("z", "needs at least one value");
      std::optional<RateFunction> f;
      if (p.is_infinite() && q.is_finite()) {
        PInftyRateOptions opt;
        opt.scale = r_scale == "norm" ? RateScale::norm : RateScale::power_mean;
        opt.conjugate_of = r_of == "mgf" ? ConjugateOf::mgf : ConjugateOf::log_mgf;
        f.emplace(rate_p_infty(q, opt));
      } else {
        try {
          f.emplace(rate_function(p, q));
        } catch (const RegimeError& e) {
          throw ConfigError("q", e.what());
        }
      }
      nlohmann::ordered_json j;
      j["regime"] = to_string(f->regime());
      j["speed_exponent"] = f->speed_exponent();
      j["zero"] = f->zero();
      for (double z : zs) j["I(" + detail::fmt(z) + ")"] = detail::number_or_inf((*f)(z));
      detail::print_values(out, j, r_json);
      return 0;
    }

    for (const auto& f : experiments) {
      if (!*f->app) continue;
      const ExperimentConfig cfg = detail::effective_config(*f);
      if (f->dry_run) {
        out << to_json(cfg).dump(2) << '\n';
        return 0;
      }
      const auto t0 = std::chrono::steady_clock::now();
      ExperimentReport report = run_experiment(cfg);
      report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const ReportFormat fmt = detail::choose_format(*f);
      if (f->output == "-") {
        write_report(report, fmt, out, f->timing);
      } else {
        emit_report(report, fmt, f->output, f->timing);
      }
      if (f->timing && fmt == ReportFormat::csv) err << "wall_time = " << *report.wall_time << " s\n";
      return report.passed() ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const RegimeError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace lpball
