#pragma once

// Command-line driver. run() parses argv, executes one task and writes a JSON
// report. Exit codes: 0 feasible/stable/pass, 1 infeasible/unstable/fail,
// 2 numerical failure, 3 input error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dwell/analysis.hpp"
#include "dwell/io.hpp"
#include "dwell/oracle.hpp"
#include "dwell/sampled_data.hpp"
#include "dwell/synthesis.hpp"

namespace dwell::cli {

using io::json;

enum Exit : int { ok = 0, negative = 1, numerical = 2, input = 3 };

struct Flags {
  std::string command;
  std::string subtask;  // sampled-data: analyze | synthesize
  std::string file;
  std::string out;
  std::string csv;
  std::optional<std::uint64_t> seed;
  std::optional<int> degree;
  std::optional<int> segments;
  std::optional<int> grid;
  std::optional<double> tol;
};

enum class SystemForm { impulsive, polytope, sampled };

struct Problem {
  json raw;
  std::string hash;
  SystemForm form = SystemForm::impulsive;
  PolytopicSystem psys;
  SampledDataSystem sd;
  PolytopicSampledData psd;
  std::optional<DwellSpec> dwell;
  Encoder enc = Encoder::sos(4);
  Settings st;
  Form cert_form = Form::d;
  bool k2_zero = false;
  std::optional<double> seed_T;
  std::uint64_t seed = 1;
  int trials = 0;
};

struct Outcome {
  json report;
  int code = Exit::ok;
  std::string csv;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void parse_system(Problem& p, const json& sys) {
  const int forms = int(sys.contains("A")) + int(sys.contains("vertices")) + int(sys.contains("sampled_data"));
  if (forms != 1) {
    throw InputError("field 'system': exactly one of A/J, vertices or sampled_data must be given");
  }
  if (sys.contains("sampled_data")) {
    p.form = SystemForm::sampled;
    const json& s = sys["sampled_data"];
    p.psd.B = io::matrix(io::field(s, "B", "system.sampled_data"), "system.sampled_data.B");
    if (s.contains("vertices")) {
      const json& vs = s["vertices"];
      if (!vs.is_array() || vs.empty()) throw InputError("field 'system.sampled_data.vertices': expected a non-empty array");
      for (std::size_t i = 0; i < vs.size(); ++i) {
        p.psd.A.push_back(io::matrix(vs[i], "system.sampled_data.vertices[" + std::to_string(i) + "]"));
      }
    } else {
      p.psd.A.push_back(io::matrix(io::field(s, "A", "system.sampled_data"), "system.sampled_data.A"));
    }
    p.psd.validate();
    p.sd.A = p.psd.A.front();
    p.sd.B = p.psd.B;
    p.sd.K1 = io::optional_matrix(s, "K1", "system.sampled_data");
    p.sd.K2 = io::optional_matrix(s, "K2", "system.sampled_data");
    p.sd.validate();
    return;
  }
  if (sys.contains("vertices")) {
    p.form = SystemForm::polytope;
    const json& vs = sys["vertices"];
    if (!vs.is_array() || vs.empty()) throw InputError("field 'system.vertices': expected a non-empty array");
    for (std::size_t i = 0; i < vs.size(); ++i) {
      p.psys.vertices.push_back(io::impulsive_from_json(vs[i], "system.vertices[" + std::to_string(i) + "]"));
    }
    p.psys.validate();
    return;
  }
  p.form = SystemForm::impulsive;
  p.psys.vertices.push_back(io::impulsive_from_json(sys, "system"));
}

inline Problem load(const std::string& text, const std::string& name, const Flags& f) {
  Problem p;
  p.raw = io::parse(text, name);
  p.hash = io::sha256_hex(text);
  if (!p.raw.is_object()) throw InputError(name + ": top level must be an object");
  const json& r = p.raw;
  // Reports from earlier runs carry the problem under "problem".
  const json& src = r.contains("system") || !r.contains("problem") ? r : r["problem"];
  if (src.contains("system")) parse_system(p, src["system"]);
  if (src.contains("dwell")) p.dwell = io::dwell_from_json(src["dwell"], "dwell");
  if (src.contains("method")) p.enc = io::encoder_from_json(src["method"], "method");
  if (src.contains("options")) {
    const json& o = src["options"];
    if (!o.is_object()) throw InputError("field 'options': expected an object");
    if (o.contains("bisect_tol")) p.st.bisect_tol = io::number(o["bisect_tol"], "options.bisect_tol");
    if (o.contains("grid")) p.st.verify_grid = io::integer(o["grid"], "options.grid");
    if (o.contains("tol")) p.st.verify_tol = io::number(o["tol"], "options.tol");
    if (o.contains("margin_threshold")) p.st.margin_threshold = io::number(o["margin_threshold"], "options.margin_threshold");
    if (o.contains("k2_zero")) {
      if (!o["k2_zero"].is_boolean()) throw InputError("field 'options.k2_zero': expected a boolean");
      p.k2_zero = o["k2_zero"].get<bool>();
    }
    if (o.contains("seed")) p.seed = static_cast<std::uint64_t>(io::integer(o["seed"], "options.seed"));
    if (o.contains("trials")) p.trials = io::integer(o["trials"], "options.trials");
    if (o.contains("seed_T")) p.seed_T = io::number(o["seed_T"], "options.seed_T");
    if (o.contains("form")) {
      const std::string form = o["form"].is_string() ? o["form"].get<std::string>() : "";
      if (form != "d" && form != "e") throw InputError("field 'options.form': expected \"d\" or \"e\"");
      p.cert_form = form == "d" ? Form::d : Form::e;
    }
  }
  if (f.degree) p.enc = Encoder::sos(*f.degree, p.enc.kind == EncoderKind::sos ? p.enc.mult_degree : -1);
  if (f.segments) p.enc = Encoder::discretization(*f.segments);
  if (f.grid) p.st.verify_grid = *f.grid;
  if (f.tol) p.st.verify_tol = *f.tol;
  if (f.seed) p.seed = *f.seed;
  if (p.st.verify_grid < 2) throw InputError("option 'grid' must be >= 2");
  if (!(p.st.verify_tol >= 0.0)) throw InputError("option 'tol' must be non-negative");
  return p;
}

inline const DwellSpec& need_dwell(const Problem& p) {
  if (!p.dwell) throw InputError("field 'dwell': missing");
  return *p.dwell;
}

inline void need_form(const Problem& p, std::initializer_list<SystemForm> ok, const std::string& task) {
  if (p.raw.is_null()) throw InputError(task + ": no problem");
  for (SystemForm f : ok) {
    if (p.form == f) return;
  }
  throw InputError(task + ": unsupported system form for this task");
}

inline json certificate_block(const Certificate& c) {
  return {{"margin", std::isfinite(c.margin) ? json(c.margin) : json(nullptr)},
          {"residuals", io::to_json(c.residuals)},
          {"variables", {{"sdp", c.sdp_vars}, {"witness", c.witness_vars}}},
          {"certificate", io::to_json(c)}};
}

inline Outcome analyze(const Problem& p) {
  const DwellSpec& spec = need_dwell(p);
  Certificate c;
  if (p.form == SystemForm::sampled) {
    if (!p.sd.has_gains()) throw InputError("analyze: sampled-data analysis needs K1 (and optionally K2)");
    c = analyze_fixed(p.sd, spec.t_min, spec.t_max, p.enc, p.st);
  } else if (p.psys.vertices.size() > 1) {
    c = robust_certificate(p.psys, spec, p.enc, p.cert_form, p.st);
  } else {
    const ImpulsiveSystem& s = p.psys.vertices.front();
    switch (spec.mode) {
      case DwellMode::periodic: c = periodic_certificate(s, spec.bar(), p.enc, p.cert_form, p.st); break;
      case DwellMode::ranged: c = ranged_certificate(s, spec.t_min, spec.t_max, p.enc, p.st); break;
      case DwellMode::minimum: c = min_dwell_certificate(s, spec.bar(), p.enc, false, p.cert_form, p.st); break;
      case DwellMode::maximum: c = min_dwell_certificate(s, spec.bar(), p.enc, true, p.cert_form, p.st); break;
    }
  }
  Outcome o;
  o.report = certificate_block(c);
  o.report["status"] = c.feasible ? "feasible" : "infeasible";
  if (p.form == SystemForm::impulsive && spec.mode == DwellMode::periodic) {
    o.report["exact_schur"] = periodic_exact(p.psys.vertices.front(), spec.bar());
  }
  o.code = c.feasible ? Exit::ok : Exit::negative;
  return o;
}

inline Outcome search(const Problem& p) {
  const DwellSpec& spec = need_dwell(p);
  Outcome o;
  json bounds;
  Certificate cert;
  int probes = 0;
  if (p.form == SystemForm::sampled) {
    if (!p.sd.has_gains()) throw InputError("search: sampled-data search needs K1");
    const double seed = p.seed_T.value_or(spec.t_max);
    const RangeResult r = search_fixed(p.sd, p.enc, spec.t_min, seed, p.st);
    bounds = {{"T_min", r.t_min}, {"T_max", r.t_max}, {"upper_capped", r.upper_capped}};
    cert = r.certificate;
    probes = r.probes;
  } else if (spec.mode == DwellMode::periodic || spec.mode == DwellMode::ranged) {
    const double seed = p.seed_T.value_or(spec.mode == DwellMode::periodic ? spec.bar()
                                                                           : 0.5 * (spec.t_min + spec.t_max));
    const RangeResult r = search_range(p.psys, p.enc, seed, p.st);
    bounds = {{"T_min", r.t_min}, {"T_max", r.t_max}, {"lower_capped", r.lower_capped},
              {"upper_capped", r.upper_capped}};
    cert = r.certificate;
    probes = r.probes;
  } else {
    if (p.psys.vertices.size() != 1) throw InputError("search: dwell-time bounds need a single system");
    const bool maximum = spec.mode == DwellMode::maximum;
    const DwellBound b = search_dwell_bound(p.psys.vertices.front(), p.enc, maximum, p.cert_form, p.st);
    bounds = {{"T", b.value}};
    cert = b.certificate;
    probes = b.probes;
  }
  o.report = certificate_block(cert);
  o.report["bounds"] = bounds;
  o.report["probes"] = probes;
  o.report["status"] = "feasible";
  o.code = Exit::ok;
  return o;
}

inline Outcome synthesize_task(const Problem& p) {
  const DwellSpec& spec = need_dwell(p);
  Outcome o;
  if (p.form == SystemForm::sampled) {
    const SampledGain g = synthesize(p.psd, spec.t_min, spec.t_max, p.enc, p.k2_zero, p.st);
    o.report["controller"] = io::to_json(g);
    o.report["margin"] = std::isfinite(g.margin) ? json(g.margin) : json(nullptr);
    o.report["variables"] = {{"sdp", g.sdp_vars}};
    o.report["k2_zero"] = p.k2_zero;
    if (p.k2_zero) o.report["notes"] = json::array({"K2 = 0 imposed through S(0) and Y block constraints"});
    if (g.bibo_warning) o.report["warnings"] = json::array({"rho(K2) >= 1: the control law is not BIBO stable"});
    o.report["status"] = g.feasible ? "feasible" : "infeasible";
    o.code = g.feasible ? Exit::ok : Exit::negative;
    return o;
  }
  SynthesisKind kind;
  if (spec.mode == DwellMode::periodic) kind = SynthesisKind::periodic;
  else if (spec.mode == DwellMode::minimum) kind = SynthesisKind::min_dwell;
  else throw InputError("synthesize: impulsive synthesis supports periodic and minimum dwell-times");
  const Controller c = stabilize_robust(p.psys, kind, spec.bar(), p.enc, p.st);
  o.report["controller"] = io::to_json(c);
  o.report["margin"] = std::isfinite(c.margin) ? json(c.margin) : json(nullptr);
  o.report["residuals"] = io::to_json(c.residuals);
  o.report["variables"] = {{"sdp", c.sdp_vars}};
  if (c.feasible && p.psys.vertices.size() == 1) {
    const ImpulsiveSystem& s = p.psys.vertices.front();
    if (kind == SynthesisKind::min_dwell) {
      const SweepCheck sc = min_dwell_sweep_check(s, spec.bar(), 20.0 * spec.bar(), 50, &c);
      o.report["closed_loop"] = {{"worst_rho", sc.worst_rho}, {"where", sc.where}, {"pass", sc.pass}};
    } else {
      const double rho =
          spectral_radius(closed_loop_transition(s, c, spec.bar(), 2000) * closed_loop_jump(s, c));
      o.report["closed_loop"] = {{"rho", rho}, {"pass", rho < 1.0}};
    }
  }
  o.report["status"] = c.feasible ? "feasible" : "infeasible";
  o.code = c.feasible ? Exit::ok : Exit::negative;
  return o;
}

inline Outcome verify(const Problem& p) {
  const json& r = p.raw;
  if (!r.contains("certificate")) throw InputError("field 'certificate': missing");
  const Certificate c = io::certificate_from_json(r["certificate"], "certificate");
  std::vector<ImpulsiveSystem> vs;
  if (p.form == SystemForm::sampled) vs.push_back(lift(p.sd));
  else vs = p.psys.vertices;
  if (vs.empty()) throw InputError("field 'system': missing");
  const AuditReport a = verify_certificate(c, vs, p.st.verify_grid, p.st.verify_tol);
  Outcome o;
  o.report["residuals"] = io::to_json(a.residuals);
  if (const auto* w = a.worst()) o.report["worst"] = {{"name", w->name}, {"min_residual", w->min_residual}};
  o.report["status"] = a.pass ? "pass" : "fail";
  o.code = a.pass ? Exit::ok : Exit::negative;
  return o;
}

inline Outcome simulate_task(const Problem& p) {
  const json& r = p.raw;
  const json& sim = io::field(r, "simulation", "");
  ImpulsiveSystem sys;
  if (p.form == SystemForm::sampled) sys = lift(p.sd);
  else if (p.psys.vertices.size() == 1) sys = p.psys.vertices.front();
  else throw InputError("simulate: needs a single system");
  std::optional<Controller> ctrl;
  if (r.contains("controller")) ctrl = io::controller_from_json(r["controller"], "controller");
  const Vec x0 = io::vector(io::field(sim, "x0", "simulation"), "simulation.x0");
  const double step = sim.contains("step") ? io::number(sim["step"], "simulation.step") : 1e-3;
  DwellSequence seq;
  if (sim.contains("dwell_times")) {
    seq.kind = "fixed";
    const json& ts = sim["dwell_times"];
    if (!ts.is_array()) throw InputError("field 'simulation.dwell_times': expected an array");
    for (const auto& t : ts) seq.T.push_back(io::number(t, "simulation.dwell_times"));
  } else {
    const json& u = io::field(sim, "uniform", "simulation");
    if (!u.is_array() || u.size() != 2) throw InputError("field 'simulation.uniform': expected [a, b]");
    const int count = io::integer(io::field(sim, "count", "simulation"), "simulation.count");
    seq = DwellSequence::uniform(io::number(u[0], "simulation.uniform"), io::number(u[1], "simulation.uniform"),
                                 count, p.seed);
  }
  const Trajectory tr = simulate(sys, seq, x0, step, ctrl ? &*ctrl : nullptr);
  Outcome o;
  std::ostringstream csv;
  tr.write_csv(csv);
  o.csv = csv.str();
  const double n0 = x0.norm();
  const double n1 = tr.x.empty() ? n0 : tr.x.back().norm();
  o.report["samples"] = tr.t.size();
  o.report["impulses"] = seq.T.size();
  o.report["sequence"] = {{"kind", seq.kind}, {"seed", seq.seed}, {"dwell_times", seq.T}};
  o.report["initial_norm"] = n0;
  o.report["final_norm"] = std::isfinite(n1) ? json(n1) : json(nullptr);
  o.report["diverged"] = tr.diverged;
  if (tr.diverged) o.report["diverged_at"] = tr.diverged_at;
  const bool decayed = !tr.diverged && n1 < n0;
  o.report["status"] = decayed ? "stable" : "unstable";
  o.code = decayed ? Exit::ok : Exit::negative;
  return o;
}

inline Outcome count(const Problem& p) {
  const json& c = io::field(p.raw, "count", "");
  const long n = io::integer(io::field(c, "n", "count"), "count.n");
  const long dr = io::integer(io::field(c, "d_r", "count"), "count.d_r");
  const long dz = c.contains("d_z") ? io::integer(c["d_z"], "count.d_z") : 0;
  const long mc = c.contains("m_c") ? io::integer(c["m_c"], "count.m_c") : 0;
  const auto [current, looped] = variable_count(n, dr, dz, mc);
  Outcome o;
  o.report["variables"] = {{"current", current}, {"looped", looped}};
  o.report["status"] = "ok";
  return o;
}

inline Outcome dispatch(const std::string& task, const Problem& p) {
  if (task == "analyze") return analyze(p);
  if (task == "search") return search(p);
  if (task == "synthesize") return synthesize_task(p);
  if (task == "verify") return verify(p);
  if (task == "simulate") return simulate_task(p);
  if (task == "count") return count(p);
  throw InputError("unknown task '" + task + "'");
}

inline void emit(const json& report, const Flags& f, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (f.out.empty()) {
    out << text;
    return;
  }
  std::ofstream os(f.out);
  if (!os) throw InputError("cannot write '" + f.out + "'");
  os << text;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Dwell-time stability analysis and synthesis for impulsive and sampled-data systems", "dwell"};
  app.require_subcommand(1);
  Flags f;
  auto common = [&f](CLI::App* sub) {
    sub->add_option("file", f.file, "problem file (JSON)")->required();
    sub->add_option("--out", f.out, "write the report here instead of stdout");
    sub->add_option("--csv", f.csv, "trajectory CSV (simulate)");
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_option("--degree", f.degree, "SOS degree of the unknowns")->check(CLI::NonNegativeNumber);
    sub->add_option("--segments", f.segments, "use the discretization encoder with N segments")
        ->check(CLI::PositiveNumber);
    sub->add_option("--grid", f.grid, "verification grid size");
    sub->add_option("--tol", f.tol, "verification tolerance");
  };
  for (const char* name : {"analyze", "search", "synthesize", "verify", "simulate", "count"}) {
    common(app.add_subcommand(name)->callback([&f, name] { f.command = name; }));
  }
  CLI::App* sd = app.add_subcommand("sampled-data", "sampled-data tasks (analyze | synthesize)");
  sd->add_option("task", f.subtask, "analyze or synthesize")->required()->check(CLI::IsMember({"analyze", "synthesize"}));
  common(sd);
  sd->callback([&f] { f.command = "sampled-data"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return Exit::input;
  }

  json report = {{"tool", "dwell"}, {"task", f.command}, {"input", f.file}};
  if (!f.subtask.empty()) report["subtask"] = f.subtask;
  const auto t0 = std::chrono::steady_clock::now();
  int code = Exit::ok;
  try {
    const std::string text = read_file(f.file);
    const Problem p = load(text, f.file, f);
    report["input_sha256"] = p.hash;
    report["settings"] = io::to_json(p.st);
    report["method"] = io::to_json(p.enc);
    if (p.dwell) report["dwell"] = io::to_json(*p.dwell);
    report["problem"] = p.raw.contains("problem") && !p.raw.contains("system") ? p.raw["problem"] : p.raw;
    report["problem"].erase("certificate");
    report["problem"].erase("controller");
    std::string task = f.command;
    if (task == "sampled-data") {
      if (p.form != SystemForm::sampled) throw InputError("sampled-data: field 'system.sampled_data' is required");
      task = f.subtask;
    }
    Outcome o = dispatch(task, p);
    report.update(o.report);
    code = o.code;
    if (!f.csv.empty()) {
      if (o.csv.empty()) throw InputError("--csv is only produced by simulate");
      std::ofstream os(f.csv);
      if (!os) throw InputError("cannot write '" + f.csv + "'");
      os << o.csv;
    }
  } catch (const NotFoundError& e) {
    report["status"] = "not_found";
    report["error"] = e.what();
    code = Exit::negative;
  } catch (const InputError& e) {
    report["status"] = "input_error";
    report["error"] = e.what();
    code = Exit::input;
  } catch (const DimensionError& e) {
    report["status"] = "input_error";
    report["error"] = e.what();
    code = Exit::input;
  } catch (const EncodingError& e) {
    report["status"] = "input_error";
    report["error"] = e.what();
    code = Exit::input;
  } catch (const Error& e) {
    report["status"] = "numerical_failure";
    report["error"] = e.what();
    code = Exit::numerical;
  } catch (const std::exception& e) {
    report["status"] = "numerical_failure";
    report["error"] = e.what();
    code = Exit::numerical;
  }
  report["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report["exit_code"] = code;
  if (report.contains("error")) err << "dwell: " << report["error"].get<std::string>() << "\n";
  try {
    emit(report, f, out);
  } catch (const InputError& e) {
    err << "dwell: " << e.what() << "\n";
    return Exit::input;
  }
  return code;
}

}  // namespace dwell::cli
