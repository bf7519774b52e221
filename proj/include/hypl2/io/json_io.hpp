#pragma once

// Strict JSON/CSV readers for the CLI inputs, report serialisers and atomic
// file output. Every schema violation names the offending JSON path.

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypl2/lagrangian.hpp"
#include "hypl2/mapping_torus.hpp"
#include "hypl2/tube.hpp"
#include "hypl2/zorich.hpp"

namespace hypl2::io {

using json = nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& path, const std::string& msg) {
  fail(ErrorCode::SchemaError, path + ": " + msg);
}

inline void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed,
                       const std::set<std::string>& required = {}) {
  if (!j.is_object()) schema_error(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) schema_error(path + "." + it.key(), "unknown key");
  for (const auto& k : required)
    if (!j.contains(k)) schema_error(path + "." + k, "missing required key");
}

inline std::string child(const std::string& path, const std::string& key) { return path + "." + key; }
inline std::string child(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  return j.get<double>();
}

inline int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) schema_error(path, "expected an integer");
  return j.get<int>();
}

inline bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) schema_error(path, "expected a boolean");
  return j.get<bool>();
}

inline std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path, "expected a string");
  return j.get<std::string>();
}

/// Integers may be JSON integers or decimal strings (for entries beyond 64 bits).
inline BigInt get_bigint(const json& j, const std::string& path) {
  if (j.is_number_integer()) return BigInt(j.get<long long>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    const std::size_t start = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
    if (s.size() > start && s.find_first_not_of("0123456789", start) == std::string::npos) return BigInt(s);
  }
  schema_error(path, "expected an integer");
}

/// "p/q", an integer string or a JSON integer.
inline Rational get_rational(const json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    const auto slash = s.find('/');
    const BigInt num = get_bigint(json(s.substr(0, slash)), path);
    if (slash == std::string::npos) return Rational(num);
    const BigInt den = get_bigint(json(s.substr(slash + 1)), path);
    if (den == 0) schema_error(path, "zero denominator");
    return Rational(num, den);
  }
  schema_error(path, "expected a rational (integer or \"p/q\")");
}

inline std::vector<double> get_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], child(path, i)));
  return out;
}

/// Row-major list of rows.
inline Mat get_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) schema_error(path, "expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = get_numbers(j[r], child(path, r));
    if (row.size() != cols) schema_error(child(path, r), "ragged row");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

/// List of column vectors, all of length `rows` (an empty list is allowed).
inline Mat get_columns(const json& j, const std::string& path, Eigen::Index rows) {
  if (!j.is_array()) schema_error(path, "expected an array of column vectors");
  Mat m(rows, static_cast<Eigen::Index>(j.size()));
  for (std::size_t c = 0; c < j.size(); ++c) {
    const auto col = get_numbers(j[c], child(path, c));
    if (static_cast<Eigen::Index>(col.size()) != rows)
      schema_error(child(path, c), "column has length " + std::to_string(col.size()) + ", expected " + std::to_string(rows));
    for (Eigen::Index r = 0; r < rows; ++r) m(r, static_cast<Eigen::Index>(c)) = col[static_cast<std::size_t>(r)];
  }
  return m;
}

inline IntMatrix get_int_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) schema_error(path, "expected a nonempty array of rows");
  std::vector<std::vector<BigInt>> rows;
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array()) schema_error(child(path, r), "expected an array");
    std::vector<BigInt> row;
    for (std::size_t c = 0; c < j[r].size(); ++c) row.push_back(get_bigint(j[r][c], child(child(path, r), c)));
    if (row.size() != j[0].size()) schema_error(child(path, r), "ragged row");
    rows.push_back(std::move(row));
  }
  return IntMatrix::from_rows(rows);
}

// ---------------------------------------------------------------------------
// files

inline json read_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorCode::IoError, file + ": cannot open for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::SchemaError, file + ": " + e.what());
  }
}

/// Write to a sibling temporary file, then rename over the target.
inline void write_atomic(const std::string& file, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(file);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, tmp.string() + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::IoError, tmp.string() + ": write failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::IoError, file + ": rename failed");
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// inputs

/// {"genus": g, "entries": [[...], ...]}
inline SymplecticMatrix parse_symplectic(const json& j, const std::string& path) {
  check_keys(j, path, {"genus", "entries"}, {"genus", "entries"});
  const int g = get_int(j["genus"], child(path, "genus"));
  if (g < 1) schema_error(child(path, "genus"), "genus must be >= 1");
  const IntMatrix m = get_int_matrix(j["entries"], child(path, "entries"));
  if (m.rows() != 2 * static_cast<std::size_t>(g) || m.cols() != m.rows())
    schema_error(child(path, "entries"), "expected a " + std::to_string(2 * g) + "x" + std::to_string(2 * g) + " matrix");
  return validate_symplectic(m);
}

struct MappingTorusInput {
  FiberAutomorphism phi;
  int degree = 1;
  bool surface = false;
  std::optional<SymplecticMatrix> monodromy;
};

/// Either a symplectic matrix (surface fibre) or {"degree_maps": [...]} with
/// optional "first_degree"; both take an optional "degree" (default 1).
inline MappingTorusInput parse_mapping_torus(const json& j, const std::string& path = "$") {
  MappingTorusInput in;
  if (j.is_object() && j.contains("entries")) {
    check_keys(j, path, {"genus", "entries", "degree"}, {"genus", "entries"});
    json m = {{"genus", j["genus"]}, {"entries", j["entries"]}};
    in.monodromy = parse_symplectic(m, path);
    in.phi = FiberAutomorphism::surface(*in.monodromy);
    in.surface = true;
  } else {
    check_keys(j, path, {"degree_maps", "first_degree", "degree"}, {"degree_maps"});
    const auto& maps = j["degree_maps"];
    if (!maps.is_array() || maps.empty()) schema_error(child(path, "degree_maps"), "expected a nonempty array");
    std::vector<IntMatrix> ms;
    for (std::size_t i = 0; i < maps.size(); ++i) ms.push_back(get_int_matrix(maps[i], child(child(path, "degree_maps"), i)));
    int first = 0;
    if (j.contains("first_degree")) first = get_int(j["first_degree"], child(path, "first_degree"));
    if (first < 0) schema_error(child(path, "first_degree"), "must be >= 0");
    in.phi = FiberAutomorphism(std::move(ms), static_cast<std::size_t>(first));
  }
  if (j.contains("degree")) in.degree = get_int(j["degree"], child(path, "degree"));
  return in;
}

/// t, then the n x n Gram entries row-major, one sample per line. Lines
/// starting with '#' and a non-numeric header line are skipped.
inline NormProfile read_sampled_csv(const std::string& file, bool extrapolate) {
  std::ifstream in(file);
  if (!in) fail(ErrorCode::IoError, file + ": cannot open for reading");
  std::vector<double> t;
  std::vector<Mat> grams;
  std::string line;
  std::size_t lineno = 0;
  Eigen::Index n = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (t.empty() && lineno == 1) continue;  // header
      fail(ErrorCode::SchemaError, file + ":" + std::to_string(lineno) + ": non-numeric cell");
    }
    const auto k = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(vals.size() - 1))));
    if (vals.size() < 2 || static_cast<std::size_t>(k * k) + 1 != vals.size())
      fail(ErrorCode::SchemaError, file + ":" + std::to_string(lineno) + ": expected 1 + n^2 columns");
    if (n < 0) n = k;
    if (k != n) fail(ErrorCode::SchemaError, file + ":" + std::to_string(lineno) + ": Gram size changes");
    t.push_back(vals[0]);
    Mat g(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) g(r, c) = vals[static_cast<std::size_t>(1 + r * n + c)];
    grams.push_back(g);
  }
  if (t.empty()) fail(ErrorCode::SchemaError, file + ": no samples");
  return NormProfile::sampled(std::move(t), std::move(grams), extrapolate);
}

/// Profile spec with a "kind" discriminator. Relative CSV paths resolve
/// against base_dir.
inline NormProfile parse_profile(const json& j, const std::string& path, const std::string& base_dir = ".") {
  if (!j.is_object() || !j.contains("kind")) schema_error(path, "profile needs a \"kind\"");
  const std::string kind = get_string(j["kind"], child(path, "kind"));
  if (kind == "ExponentialSplit") {
    check_keys(j, path, {"kind", "dim", "e_plus", "e_minus", "a", "c_plus", "c_minus"}, {"kind", "dim", "e_plus", "e_minus", "a"});
    const int n = get_int(j["dim"], child(path, "dim"));
    if (n < 1) schema_error(child(path, "dim"), "must be >= 1");
    const double cp = j.contains("c_plus") ? get_number(j["c_plus"], child(path, "c_plus")) : 1.0;
    const double cm = j.contains("c_minus") ? get_number(j["c_minus"], child(path, "c_minus")) : 1.0;
    return NormProfile::exponential_split(get_columns(j["e_plus"], child(path, "e_plus"), n),
                                          get_columns(j["e_minus"], child(path, "e_minus"), n),
                                          get_number(j["a"], child(path, "a")), cp, cm);
  }
  if (kind == "PeriodicPA") {
    check_keys(j, path, {"kind", "monodromy", "g0", "tol"}, {"kind", "monodromy"});
    const auto phi = parse_symplectic(j["monodromy"], child(path, "monodromy"));
    const auto n = static_cast<Eigen::Index>(phi.dim());
    const Mat g0 = j.contains("g0") ? get_matrix(j["g0"], child(path, "g0")) : Mat(Mat::Identity(n, n));
    const double tol = j.contains("tol") ? get_number(j["tol"], child(path, "tol")) : 1e-6;
    return NormProfile::periodic_pa(phi, g0, tol);
  }
  if (kind == "Polynomial") {
    check_keys(j, path, {"kind", "coeff", "power", "basis", "envelope"}, {"kind", "coeff", "power"});
    const auto c = get_numbers(j["coeff"], child(path, "coeff"));
    const auto p = get_numbers(j["power"], child(path, "power"));
    const Mat basis = j.contains("basis") ? get_columns(j["basis"], child(path, "basis"), static_cast<Eigen::Index>(c.size())) : Mat();
    const double env = j.contains("envelope") ? get_number(j["envelope"], child(path, "envelope")) : 0.0;
    return NormProfile::polynomial(Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size())),
                                   Eigen::Map<const Vec>(p.data(), static_cast<Eigen::Index>(p.size())), basis, env);
  }
  if (kind == "Sampled") {
    check_keys(j, path, {"kind", "t", "gram", "csv", "extrapolate"}, {"kind"});
    const bool ex = j.contains("extrapolate") && get_bool(j["extrapolate"], child(path, "extrapolate"));
    if (j.contains("csv")) {
      if (j.contains("t") || j.contains("gram")) schema_error(path, "give either \"csv\" or \"t\"/\"gram\", not both");
      std::filesystem::path f(get_string(j["csv"], child(path, "csv")));
      if (f.is_relative()) f = std::filesystem::path(base_dir) / f;
      return read_sampled_csv(f.string(), ex);
    }
    if (!j.contains("t") || !j.contains("gram")) schema_error(path, "Sampled needs \"t\" and \"gram\" (or \"csv\")");
    const auto t = get_numbers(j["t"], child(path, "t"));
    const auto& g = j["gram"];
    if (!g.is_array()) schema_error(child(path, "gram"), "expected an array of matrices");
    std::vector<Mat> grams;
    for (std::size_t i = 0; i < g.size(); ++i) grams.push_back(get_matrix(g[i], child(child(path, "gram"), i)));
    return NormProfile::sampled(t, std::move(grams), ex);
  }
  schema_error(child(path, "kind"), "unknown profile kind \"" + kind + "\"");
}

struct EndInput {
  NormProfile profile = NormProfile::constant(1);
  std::optional<SplitSpec> split;
};

/// {"profile": {...}, "split": {"e_plus", "e_minus", "a", "c_plus", "c_minus"}?}
/// or a bare profile.
inline EndInput parse_end(const json& j, const std::string& path, const std::string& base_dir) {
  EndInput e;
  if (j.is_object() && j.contains("kind")) {
    e.profile = parse_profile(j, path, base_dir);
    return e;
  }
  check_keys(j, path, {"profile", "split"}, {"profile"});
  e.profile = parse_profile(j["profile"], child(path, "profile"), base_dir);
  if (j.contains("split")) {
    const auto& s = j["split"];
    const std::string sp = child(path, "split");
    check_keys(s, sp, {"e_plus", "e_minus", "a", "c_plus", "c_minus"}, {"e_plus", "e_minus", "a"});
    const Eigen::Index n = e.profile.dim();
    SplitSpec spec{get_columns(s["e_plus"], child(sp, "e_plus"), n), get_columns(s["e_minus"], child(sp, "e_minus"), n),
                   get_number(s["a"], child(sp, "a")), 1.0, 1.0};
    if (s.contains("c_plus")) spec.c_plus = get_number(s["c_plus"], child(sp, "c_plus"));
    if (s.contains("c_minus")) spec.c_minus = get_number(s["c_minus"], child(sp, "c_minus"));
    e.split = spec;
  }
  return e;
}

struct ManifoldInput {
  std::vector<EndSpec> ends;
  bool inj_radius_positive = true;
};

/// {"inj_radius_positive": bool, "ends": [{"type": "GeometricallyFinite"} |
/// {"type": "Degenerate", "name"?, "profile", "split"?}]}
inline ManifoldInput parse_manifold(const json& j, const std::string& base_dir, const std::string& path = "$") {
  check_keys(j, path, {"inj_radius_positive", "ends"}, {"ends"});
  ManifoldInput m;
  if (j.contains("inj_radius_positive")) m.inj_radius_positive = get_bool(j["inj_radius_positive"], child(path, "inj_radius_positive"));
  const auto& ends = j["ends"];
  if (!ends.is_array()) schema_error(child(path, "ends"), "expected an array");
  for (std::size_t i = 0; i < ends.size(); ++i) {
    const std::string ep = child(child(path, "ends"), i);
    const auto& e = ends[i];
    if (!e.is_object() || !e.contains("type")) schema_error(ep, "end needs a \"type\"");
    const std::string type = get_string(e["type"], child(ep, "type"));
    EndSpec spec;
    spec.name = "end" + std::to_string(i);
    if (type == "GeometricallyFinite") {
      check_keys(e, ep, {"type", "name"});
      spec.type = EndType::GeometricallyFinite;
    } else if (type == "Degenerate") {
      check_keys(e, ep, {"type", "name", "profile", "split"}, {"type", "profile"});
      spec.type = EndType::Degenerate;
      json inner = {{"profile", e["profile"]}};
      if (e.contains("split")) inner["split"] = e["split"];
      auto parsed = parse_end(inner, ep, base_dir);
      spec.profile = parsed.profile;
      spec.options.split = parsed.split;
    } else {
      schema_error(child(ep, "type"), "unknown end type \"" + type + "\"");
    }
    if (e.contains("name")) spec.name = get_string(e["name"], child(ep, "name"));
    m.ends.push_back(std::move(spec));
  }
  return m;
}

enum class IetMode { Rational, Quadratic, Float };

inline IetMode parse_iet_mode(const std::string& s, const std::string& path) {
  if (s == "rational") return IetMode::Rational;
  if (s == "quadratic") return IetMode::Quadratic;
  if (s == "float") return IetMode::Float;
  schema_error(path, "mode must be rational, quadratic or float");
}

inline std::string to_string(IetMode m) {
  switch (m) {
    case IetMode::Rational: return "rational";
    case IetMode::Quadratic: return "quadratic";
    case IetMode::Float: return "float";
  }
  return "?";
}

/// A number a + b sqrt5: a rational, or {"a": rational, "b": rational}.
inline QuadraticSurd get_surd(const json& j, const std::string& path) {
  if (j.is_object()) {
    check_keys(j, path, {"a", "b"});
    return {j.contains("a") ? get_rational(j["a"], child(path, "a")) : Rational(0),
            j.contains("b") ? get_rational(j["b"], child(path, "b")) : Rational(0)};
  }
  return QuadraticSurd(get_rational(j, path));
}

inline Quad get_quad(const json& j, const std::string& path) {
  if (j.is_number_float()) return Quad(j.get<double>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s.find('/') == std::string::npos && s.find_first_not_of("0123456789+-.eE") == std::string::npos) {
      try {
        return Quad(s);
      } catch (const std::exception&) {
        schema_error(path, "malformed decimal");
      }
    }
  }
  const QuadraticSurd q = get_surd(j, path);
  auto quad = [](const Rational& r) {
    return Quad(boost::multiprecision::numerator(r).str()) / Quad(boost::multiprecision::denominator(r).str());
  };
  return quad(q.rational_part()) + quad(q.surd_part()) * boost::multiprecision::sqrt(Quad(5));
}

struct IetInput {
  json lengths, point, interval;  // raw, decoded per mode
  std::vector<int> permutation;
  IetMode mode = IetMode::Rational;
  long long returns = 10000;
  ReturnPolicy policy = ReturnPolicy::Closest;
  int genus = 1;
  std::optional<Mat> projection;
  std::size_t min_loops = 10;
  double tol_cluster = 0.1;
};

struct PaInput {
  SymplecticMatrix monodromy = validate_symplectic(IntMatrix::identity(2));
  int powers = 300;
  double tol_cluster = 0.1;
};

/// {"source": "iet", "lengths", "permutation", "mode"?, "point", "interval"?,
///  "returns"?, "policy"?, "genus"?, "projection"?, "min_loops"?, "tol_cluster"?}
/// or {"source": "pa", "monodromy", "powers"?, "tol_cluster"?}
inline std::variant<IetInput, PaInput> parse_lyapunov(const json& j, const std::string& path = "$") {
  if (!j.is_object() || !j.contains("source")) schema_error(path, "needs \"source\": \"iet\" or \"pa\"");
  const std::string src = get_string(j["source"], child(path, "source"));
  if (src == "pa") {
    check_keys(j, path, {"source", "monodromy", "powers", "tol_cluster"}, {"source", "monodromy"});
    PaInput p;
    p.monodromy = parse_symplectic(j["monodromy"], child(path, "monodromy"));
    if (j.contains("powers")) p.powers = get_int(j["powers"], child(path, "powers"));
    if (j.contains("tol_cluster")) p.tol_cluster = get_number(j["tol_cluster"], child(path, "tol_cluster"));
    return p;
  }
  if (src != "iet") schema_error(child(path, "source"), "must be \"iet\" or \"pa\"");
  check_keys(j, path,
             {"source", "lengths", "permutation", "mode", "point", "interval", "returns", "policy", "genus", "projection",
              "min_loops", "tol_cluster"},
             {"source", "lengths", "permutation", "point"});
  IetInput in;
  in.lengths = j["lengths"];
  if (!in.lengths.is_array() || in.lengths.empty()) schema_error(child(path, "lengths"), "expected a nonempty array");
  const auto& perm = j["permutation"];
  if (!perm.is_array()) schema_error(child(path, "permutation"), "expected an array");
  for (std::size_t i = 0; i < perm.size(); ++i) in.permutation.push_back(get_int(perm[i], child(child(path, "permutation"), i)));
  in.point = j["point"];
  if (j.contains("interval")) {
    in.interval = j["interval"];
    if (!in.interval.is_array() || in.interval.size() != 2) schema_error(child(path, "interval"), "expected [lo, hi]");
  }
  if (j.contains("mode")) in.mode = parse_iet_mode(get_string(j["mode"], child(path, "mode")), child(path, "mode"));
  if (j.contains("returns")) {
    in.returns = get_int(j["returns"], child(path, "returns"));
    if (in.returns < 1) schema_error(child(path, "returns"), "must be >= 1");
  }
  if (j.contains("policy")) {
    const auto p = get_string(j["policy"], child(path, "policy"));
    if (p == "first") in.policy = ReturnPolicy::First;
    else if (p == "closest") in.policy = ReturnPolicy::Closest;
    else schema_error(child(path, "policy"), "must be \"first\" or \"closest\"");
  }
  if (j.contains("genus")) in.genus = get_int(j["genus"], child(path, "genus"));
  if (j.contains("projection")) in.projection = get_matrix(j["projection"], child(path, "projection"));
  if (j.contains("min_loops")) in.min_loops = static_cast<std::size_t>(get_int(j["min_loops"], child(path, "min_loops")));
  if (j.contains("tol_cluster")) in.tol_cluster = get_number(j["tol_cluster"], child(path, "tol_cluster"));
  return in;
}

struct LagrangianInput {
  SymplecticSpace space{{{1, 1}}};
  Subspace l1, l2;
  Mat interior_map;
  bool closed_image = false;
  std::string source;  // "explicit" or "product_core"
};

/// {"components": [{"genus", "sign"}], "l1": [cols], "l2": [cols],
///  "interior_map": [rows]?, "closed_image": bool}
/// or {"product_core": {"monodromy", "doubled"}, "closed_image"?}; without an
/// explicit flag the product core attests closed image from its end verdicts.
inline LagrangianInput parse_lagrangian(const json& j, const std::string& path = "$") {
  LagrangianInput in;
  if (j.is_object() && j.contains("product_core")) {
    check_keys(j, path, {"product_core", "closed_image"}, {"product_core"});
    const auto& pc = j["product_core"];
    const std::string pp = child(path, "product_core");
    check_keys(pc, pp, {"monodromy", "doubled"}, {"monodromy"});
    const auto phi = parse_symplectic(pc["monodromy"], child(pp, "monodromy"));
    const bool doubled = pc.contains("doubled") && get_bool(pc["doubled"], child(pp, "doubled"));
    auto c = product_core(phi, doubled);
    in.space = c.space;
    in.l1 = c.l1;
    in.l2 = c.l2;
    in.interior_map = c.interior_map;
    if (j.contains("closed_image")) {
      in.closed_image = get_bool(j["closed_image"], child(path, "closed_image"));
    } else {
      const auto n = static_cast<Eigen::Index>(phi.dim());
      const auto end = end_verdict(NormProfile::periodic_pa(phi, Mat::Identity(n, n)));
      in.closed_image = closed_image_attested({end, end});
    }
    in.source = "product_core";
    return in;
  }
  check_keys(j, path, {"components", "l1", "l2", "interior_map", "closed_image"}, {"components", "l1", "l2", "closed_image"});
  const auto& comps = j["components"];
  if (!comps.is_array() || comps.empty()) schema_error(child(path, "components"), "expected a nonempty array");
  std::vector<BoundaryComponent> bc;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string cp = child(child(path, "components"), i);
    check_keys(comps[i], cp, {"genus", "sign"}, {"genus", "sign"});
    bc.push_back({get_int(comps[i]["genus"], child(cp, "genus")), get_int(comps[i]["sign"], child(cp, "sign"))});
  }
  in.space = SymplecticSpace(bc);
  const Eigen::Index n = in.space.dim();
  const Mat a = get_columns(j["l1"], child(path, "l1"), n), b = get_columns(j["l2"], child(path, "l2"), n);
  in.l1 = a.cols() == 0 ? Subspace::zero(static_cast<int>(n)) : Subspace(a);
  in.l2 = b.cols() == 0 ? Subspace::zero(static_cast<int>(n)) : Subspace(b);
  in.interior_map = j.contains("interior_map") ? get_matrix(j["interior_map"], child(path, "interior_map")) : Mat();
  in.closed_image = get_bool(j["closed_image"], child(path, "closed_image"));
  in.source = "explicit";
  return in;
}

struct TubeInput {
  std::vector<double> k_list, l_list;
  TubeScanOptions options;
};

/// {"k_list": [...], "l_list": [...], "cells"?, "residual_threshold"?}
inline TubeInput parse_tube(const json& j, const std::string& path = "$") {
  check_keys(j, path, {"k_list", "l_list", "cells", "residual_threshold"}, {"k_list", "l_list"});
  TubeInput t;
  t.k_list = get_numbers(j["k_list"], child(path, "k_list"));
  t.l_list = get_numbers(j["l_list"], child(path, "l_list"));
  if (j.contains("cells")) t.options.cells = get_int(j["cells"], child(path, "cells"));
  if (j.contains("residual_threshold"))
    t.options.residual_threshold = get_number(j["residual_threshold"], child(path, "residual_threshold"));
  return t;
}

// ---------------------------------------------------------------------------
// serialisation

inline json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline json columns_json(const Mat& m) {
  json cols = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    json col = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) col.push_back(m(r, c));
    cols.push_back(col);
  }
  return cols;
}

inline json poly_json(const std::vector<BigInt>& p) {
  json a = json::array();
  for (const auto& c : p) {
    if (c >= std::numeric_limits<long long>::min() && c <= std::numeric_limits<long long>::max())
      a.push_back(static_cast<long long>(c));
    else
      a.push_back(c.str());
  }
  return a;
}

inline json to_json(const UnitCircleVerdict& v) {
  return {{"verdict", v.verdict},
          {"certificate",
           {{"branch", to_string(v.certificate.branch)},
            {"sturm_count", v.certificate.sturm_count},
            {"mult_plus_one", v.certificate.mult_plus_one},
            {"mult_minus_one", v.certificate.mult_minus_one}}}};
}

inline json to_json(const UnitLambda& l) {
  json j = {{"re", l.value.real()}, {"im", l.value.imag()}};
  if (l.exact()) {
    j["poly"] = poly_json(*l.poly);
    j["root_index"] = l.root_index;
  }
  return j;
}

inline json to_json(const ScanResult& s) {
  return {{"T", s.T},
          {"sigma_min", s.sigma},
          {"sigma_min_raw", s.sigma_raw},
          {"beta", s.beta},
          {"r2", s.r2},
          {"refinement_change", s.refinement_change},
          {"verdict", to_string(s.verdict)}};
}

inline json to_json(const EndResult& r) {
  const auto& e = r.evidence;
  json j = {{"verdict", to_string(r.verdict)},
            {"branch", e.branch},
            {"heuristic", e.heuristic},
            {"note", e.note},
            {"kernel_dim", static_cast<int>(e.kernel.basis.cols())},
            {"kernel_basis", columns_json(e.kernel.basis)},
            {"kernel_indeterminate", e.kernel.indeterminate}};
  if (e.scan) {
    j["sigma_min"] = e.scan->sigma;
    j["beta"] = e.scan->beta;
    j["scan"] = to_json(*e.scan);
  } else {
    j["sigma_min"] = json::array();
    j["beta"] = nullptr;
  }
  if (e.split) {
    j["split"] = {{"dim_plus", static_cast<int>(e.split->e_plus.cols())},
                  {"dim_minus", static_cast<int>(e.split->e_minus.cols())},
                  {"a", e.split->a},
                  {"c_plus", e.split->c_plus},
                  {"c_minus", e.split->c_minus}};
  }
  if (e.split_check) j["split_holds"] = e.split_check->holds;
  json env = json::array();
  for (const auto& x : e.envelopes)
    env.push_back({{"direction", std::vector<double>(x.direction.data(), x.direction.data() + x.direction.size())},
                   {"c_half", x.c_half},
                   {"c_full", x.c_full},
                   {"holds", x.holds}});
  j["envelopes"] = env;
  return j;
}

inline json to_json(const LyapunovFiltration& f) {
  json strata = json::array();
  for (const auto& s : f.strata) strata.push_back({{"theta", s.theta}, {"dim", s.dim}, {"basis", columns_json(s.basis)}});
  json chain = json::array();
  for (const auto& c : f.chain) chain.push_back(static_cast<int>(c.cols()));
  return {{"strata", strata},
          {"chain_dims", chain},
          {"exponents", f.exponents},
          {"top_raw", f.top_raw},
          {"pairing_defect", f.pairing_defect},
          {"dim_f0", f.dim_f0()},
          {"tol_cluster", f.tol_cluster}};
}

inline json to_json(const GapDecision& g) {
  return {{"gap_predicted", g.gap_predicted}, {"dim_f0", g.dim_f0}, {"genus", g.genus}, {"conjectural", g.conjectural}};
}

inline json to_json(const PaCrossCheck& p) {
  return {{"expected", p.expected},
          {"recovered", p.recovered},
          {"expected_dims", p.expected_dims},
          {"recovered_dims", p.recovered_dims},
          {"max_exponent_error", p.max_exponent_error},
          {"subspace_defect", p.subspace_defect},
          {"exponents_match", p.exponents_match},
          {"dims_match", p.dims_match},
          {"subspaces_match", p.subspaces_match},
          {"agrees", p.agrees},
          {"attempts", p.attempts},
          {"filtration", to_json(p.filtration)}};
}

inline json to_json(const QuasimodeResult& q) {
  return {{"k", q.k},
          {"l", q.l},
          {"R", q.R},
          {"c_nk", {{"re", q.c.real()}, {"im", q.c.imag()}}},
          {"abs_c", q.abs_c},
          {"norm", q.norm},
          {"norm_expanded", q.norm_expanded},
          {"residual", q.residual},
          {"dt_defect", q.dt_defect}};
}

inline json to_json(const TubeTrend& t) {
  json rows = json::array();
  for (const auto& r : t.rows) rows.push_back(to_json(r));
  return {{"k", t.k},
          {"rows", rows},
          {"residual_decreasing", t.residual_decreasing},
          {"c_decreasing", t.c_decreasing},
          {"norm_defect_decreasing", t.norm_defect_decreasing},
          {"terminal_norm_in_band", t.norms_in_band},
          {"terminal_below_threshold", t.terminal_below_threshold},
          {"extrapolated_residual", t.extrapolated_residual},
          {"verdict", to_string(t.verdict)}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_number(double x) {
  std::ostringstream o;
  o.precision(17);
  o << x;
  return o.str();
}

/// k, l, R, c_nk (re, im, abs), norm, residual
inline std::string tube_csv(const std::vector<TubeTrend>& trends) {
  std::string out = "k,l,R,c_re,c_im,c_abs,norm,residual\n";
  for (const auto& t : trends)
    for (const auto& r : t.rows)
      out += csv_number(r.k) + "," + csv_number(r.l) + "," + csv_number(r.R) + "," + csv_number(r.c.real()) + "," +
             csv_number(r.c.imag()) + "," + csv_number(r.abs_c) + "," + csv_number(r.norm) + "," +
             csv_number(r.residual) + "\n";
  return out;
}

/// n, visits..., norm
inline std::string loops_csv(const std::vector<ReturnLoopRecord>& loops) {
  std::string out = "n";
  const std::size_t m = loops.empty() ? 0 : loops.front().visits.size();
  for (std::size_t i = 0; i < m; ++i) out += ",v" + std::to_string(i + 1);
  out += ",norm\n";
  for (const auto& r : loops) {
    out += std::to_string(r.n);
    for (const auto& v : r.visits) out += "," + v.str();
    out += "," + csv_number(r.norm_h) + "\n";
  }
  return out;
}

}  // namespace hypl2::io
