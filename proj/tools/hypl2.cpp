#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "hypl2/io/json_io.hpp"
#include "hypl2/verify.hpp"
#include "hypl2/version.hpp"

using namespace hypl2;
using io::json;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kInconclusive = 2;

struct Flags {
  std::string input;
  std::string output;
  std::optional<double> tol;
  std::optional<double> grid;
  std::optional<double> tmax;
  unsigned seed = 1;
  std::optional<std::string> mode;
};

struct Outcome {
  json result;
  int status = kOk;
  std::string csv;  // optional companion table
};

json options_echo(const Flags& f) {
  json o = json::object();
  o["tol"] = f.tol ? json(*f.tol) : json(nullptr);
  o["grid"] = f.grid ? json(*f.grid) : json(nullptr);
  o["tmax"] = f.tmax ? json(*f.tmax) : json(nullptr);
  o["mode"] = f.mode ? json(*f.mode) : json(nullptr);
  return o;
}

std::string base_dir(const Flags& f) {
  const auto p = std::filesystem::path(f.input).parent_path();
  return p.empty() ? "." : p.string();
}

EndOptions end_options(const Flags& f) {
  EndOptions o;
  if (f.grid) o.density = *f.grid;
  if (f.tol) o.kernel_tol = *f.tol;
  if (f.tmax) {
    require(*f.tmax >= 20, ErrorCode::InvalidArgument, "--tmax must be at least 20");
    o.t_list.clear();
    for (double t = 10; t <= *f.tmax + 1e-9; t *= 2) o.t_list.push_back(t);
    o.kernel_t_max = *f.tmax;
    o.envelope_horizon = std::max(o.envelope_horizon, *f.tmax);
  }
  return o;
}

bool inconclusive(const EndResult& r) { return r.verdict == EndVerdict::Inconclusive || r.evidence.kernel.indeterminate; }

Outcome run_mapping_torus(const json& in, const Flags&) {
  const auto mt = io::parse_mapping_torus(in);
  Outcome o;
  const int p = mt.degree;
  o.result["degree"] = p;
  o.result["zero_in_spectrum"] = zero_in_spectrum_unreduced(mt.phi, p);
  o.result["zero_in_spectrum_image_closure"] = zero_in_spectrum_image_closure(mt.phi, p);
  const auto rep = reduced_l2_vanishes(mt.phi, p);
  o.result["reduced_l2_vanishes"] = rep.vanishes;
  json ex = json::array();
  for (const auto& e : rep.exceptional_lambdas)
    ex.push_back({{"lambda", io::to_json(e.lambda)},
                  {"coker_dim", e.dims.coker_dim},
                  {"ker_dim", e.dims.ker_dim},
                  {"h_dim", e.dims.h_dim}});
  o.result["exceptional_lambdas"] = ex;
  if (mt.monodromy) {
    o.result["unit_circle"] = io::to_json(has_unit_circle_eigenvalue(*mt.monodromy));
    o.result["char_poly"] = io::poly_json(char_poly(*mt.monodromy).coeffs);
  }
  return o;
}

Outcome run_end_verdict(const json& in, const Flags& f) {
  const auto e = io::parse_end(in, "$", base_dir(f));
  EndOptions opt = end_options(f);
  opt.split = e.split;
  const EndResult r = end_verdict(e.profile, opt);
  Outcome o;
  o.result = io::to_json(r);
  o.status = inconclusive(r) ? kInconclusive : kOk;
  return o;
}

Outcome run_manifold_verdict(const json& in, const Flags& f) {
  auto m = io::parse_manifold(in, base_dir(f));
  for (auto& e : m.ends) {
    auto split = e.options.split;
    e.options = end_options(f);
    e.options.split = split;
  }
  const auto rep = manifold_verdict(m.ends, m.inj_radius_positive);
  Outcome o;
  o.result["zero_in_spectrum"] = rep.zero_in_spectrum ? json(*rep.zero_in_spectrum) : json(nullptr);
  o.result["reason"] = rep.reason;
  o.result["zero_in_function_spectrum"] = rep.zero_in_function_spectrum;
  json ends = json::array();
  for (std::size_t i = 0; i < rep.ends.size(); ++i) {
    json e = {{"name", m.ends[i].name},
              {"type", m.ends[i].type == EndType::GeometricallyFinite ? "GeometricallyFinite" : "Degenerate"}};
    e["end_verdict"] = rep.ends[i] ? io::to_json(*rep.ends[i]) : json(nullptr);
    ends.push_back(e);
  }
  o.result["ends"] = ends;
  o.status = rep.zero_in_spectrum ? kOk : kInconclusive;
  return o;
}

template <class R>
std::vector<ReturnLoopRecord> iet_loops(const io::IetInput& in, R (*decode)(const json&, const std::string&)) {
  std::vector<R> lengths;
  for (std::size_t i = 0; i < in.lengths.size(); ++i) lengths.push_back(decode(in.lengths[i], io::child("$.lengths", i)));
  const IntervalExchange<R> iet(lengths, in.permutation);
  const R p = decode(in.point, "$.point");
  const R lo = in.interval.is_null() ? R(0) : decode(in.interval[0], "$.interval[0]");
  const R hi = in.interval.is_null() ? lengths[0] : decode(in.interval[1], "$.interval[1]");
  return return_loops(iet, p, lo, hi, in.returns, in.policy);
}

Rational rational_only(const json& j, const std::string& path) { return io::get_rational(j, path); }

Outcome run_lyapunov(const json& in, const Flags& f) {
  const auto parsed = io::parse_lyapunov(in);
  Outcome o;
  if (const auto* pa = std::get_if<io::PaInput>(&parsed)) {
    PaCrossCheckOptions opt;
    opt.seed = f.seed;
    opt.powers = pa->powers;
    opt.tol_cluster = f.tol ? *f.tol : pa->tol_cluster;
    const auto r = pa_cross_check(pa->monodromy, opt);
    o.result["source"] = "pa";
    o.result["cross_check"] = io::to_json(r);
    o.result["gap"] = io::to_json(gap_decision(r.filtration, static_cast<int>(pa->monodromy.genus())));
    return o;
  }
  const auto& it = std::get<io::IetInput>(parsed);
  io::IetMode mode = it.mode;
  if (f.mode) {
    // --mode float switches surd or rational lengths to 113-bit floats
    if (*f.mode == "float") mode = io::IetMode::Float;
    else if (*f.mode == "rational") {
      if (mode == io::IetMode::Float) mode = io::IetMode::Rational;
    } else {
      fail(ErrorCode::SchemaError, "--mode: must be rational or float");
    }
  }
  std::vector<ReturnLoopRecord> loops;
  switch (mode) {
    case io::IetMode::Rational: loops = iet_loops<Rational>(it, &rational_only); break;
    case io::IetMode::Quadratic: loops = iet_loops<QuadraticSurd>(it, &io::get_surd); break;
    case io::IetMode::Float: loops = iet_loops<Quad>(it, &io::get_quad); break;
  }
  o.result["source"] = "iet";
  o.result["mode"] = io::to_string(mode);
  o.result["policy"] = to_string(it.policy);
  o.result["loops"] = loops.size();
  o.result["iterations"] = loops.empty() ? 0 : loops.back().iterations;
  FiltrationOptions fo;
  fo.min_loops = it.min_loops;
  fo.tol_cluster = f.tol ? *f.tol : it.tol_cluster;
  try {
    const auto filt = filtration(loops, fo);
    o.result["filtration"] = io::to_json(filt);
    o.result["gap"] = io::to_json(gap_decision(filt, it.genus, it.projection));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnresolvedStrata) throw;
    o.result["filtration"] = nullptr;
    o.result["unresolved"] = e.what();
    o.status = kInconclusive;
  }
  o.csv = io::loops_csv(loops);
  return o;
}

Outcome run_lagrangian(const json& in, const Flags&) {
  const auto l = io::parse_lagrangian(in);
  Outcome o;
  o.result["source"] = l.source;
  o.result["ambient_dim"] = l.space.dim();
  o.result["l1_lagrangian"] = is_lagrangian(l.l1, l.space, 1e-10);
  o.result["l2_lagrangian"] = is_lagrangian(l.l2, l.space, 1e-10);
  o.result["closed_image_attested"] = l.closed_image;
  const auto r = reduced_h1_dim(l.interior_map, l.l1, l.l2, l.closed_image);
  o.result["reduced_h1_dim"] = r.dim;
  o.result["breakdown"] = {{"interior_rank", r.interior_rank}, {"intersection_dim", r.intersection_dim}};
  return o;
}

Outcome run_tube(const json& in, const Flags& f) {
  auto t = io::parse_tube(in);
  if (f.grid) t.options.cells = static_cast<int>(*f.grid);
  if (f.tol) t.options.residual_threshold = *f.tol;
  const auto trends = essential_spectrum_scan(t.k_list, t.l_list, t.options);
  Outcome o;
  json arr = json::array();
  for (const auto& x : trends) arr.push_back(io::to_json(x));
  o.result["trends"] = arr;
  o.result["cells"] = t.options.cells;
  o.result["residual_threshold"] = t.options.residual_threshold;
  o.csv = io::tube_csv(trends);
  return o;
}

Outcome run_verify(const Flags& f) {
  Outcome o;
  json arr = json::array();
  bool all = true;
  for (const auto& c : verify::replay(f.seed)) {
    std::cerr << (c.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << "): " << c.detail << " ["
              << c.seconds << " s]\n";
    arr.push_back({{"id", c.id}, {"title", c.title}, {"pass", c.pass}, {"detail", c.detail}});
    all = all && c.pass;
  }
  o.result["criteria"] = arr;
  o.result["all_pass"] = all;
  o.status = all ? kOk : kError;
  return o;
}

void emit(const Flags& f, const std::string& command, const json& inputs, const Outcome& o) {
  json report;
  report["tool"] = "hypl2";
  report["version"] = kVersion;
  report["command"] = command;
  report["seed"] = f.seed;
  report["options"] = options_echo(f);
  report["inputs"] = inputs;
  report["result"] = o.result;
  report["status"] = o.status == kOk ? "ok" : (o.status == kInconclusive ? "inconclusive" : "failed");
  const std::string text = io::dump(report);
  if (f.output.empty()) {
    std::cout << text;
  } else {
    io::write_atomic(f.output, text);
    if (!o.csv.empty()) {
      auto csv = std::filesystem::path(f.output);
      csv.replace_extension(".csv");
      io::write_atomic(csv.string(), o.csv);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral gap decisions for model ends of hyperbolic 3-manifolds"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--output,-o", f.output, "report path (JSON; a companion .csv is written for tables); stdout if absent");
  app.add_option("--tol", f.tol, "tolerance override (meaning depends on the command)");
  app.add_option("--grid", f.grid, "grid override: points per unit time, or tube cells");
  app.add_option("--tmax", f.tmax, "largest horizon for end scans");
  app.add_option("--seed", f.seed, "random seed")->capture_default_str();
  app.add_option("--mode", f.mode, "IET arithmetic: rational or float")->check(CLI::IsMember({"rational", "float"}));

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"mapping-torus", "twisted cohomology and zero-in-spectrum for a mapping torus"},
      {"end-verdict", "closed-image verdict for one degenerate end profile"},
      {"manifold-verdict", "combine end verdicts into a spectral gap decision"},
      {"lyapunov", "Lyapunov filtration from IET return loops or a pseudo-Anosov cross-check"},
      {"lagrangian", "reduced L2 H1 dimension from a Lagrangian intersection"},
      {"tube", "Margulis tube quasimode scan"},
      {"verify", "replay the reference examples"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    if (name != "verify") sub->add_option("--input,-i", f.input, "input JSON")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "verify") {
      const Outcome o = run_verify(f);
      emit(f, command, json::object(), o);
      return o.status;
    }
    const json in = io::read_json(f.input);
    Outcome o;
    if (command == "mapping-torus") o = run_mapping_torus(in, f);
    else if (command == "end-verdict") o = run_end_verdict(in, f);
    else if (command == "manifold-verdict") o = run_manifold_verdict(in, f);
    else if (command == "lyapunov") o = run_lyapunov(in, f);
    else if (command == "lagrangian") o = run_lagrangian(in, f);
    else o = run_tube(in, f);
    emit(f, command, in, o);
    return o.status;
  } catch (const Error& e) {
    std::cerr << "hypl2: " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "hypl2: " << e.what() << "\n";
    return kError;
  }
}
