#include "curlvar/cli_io.hpp"

#include <sys/utsname.h>

#include <Eigen/Core>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <thread>

#include <fftw3.h>

#include "curlvar/brezis_nirenberg.hpp"
#include "curlvar/errors.hpp"
#include "curlvar/export.hpp"
#include "curlvar/groundstate.hpp"
#include "curlvar/parallel.hpp"
#include "curlvar/spectrum.hpp"
#include "curlvar/verify.hpp"

namespace curlvar {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Located {
  int line = 0;
  int column = 0;
};
using Positions = std::map<std::string, Located>;

// TOML subset: flat `key = value` lines, see parse_config.
class TomlReader {
public:
  explicit TomlReader(const std::string& text) : s_(text) {}

  json parse(Positions& where) {
    json doc = json::object();
    for (;;) {
      skip_blank(true);
      if (eof()) return doc;
      const Located at = here();
      if (peek() == '[') fail("tables are not supported; use flat keys");
      const std::string key = read_key();
      skip_blank(false);
      if (eof() || peek() != '=') fail("expected '=' after the key");
      ++pos_;
      skip_blank(false);
      json value = read_value();
      skip_blank(false);
      if (!eof() && peek() != '\n') fail("unexpected text after the value");
      if (doc.contains(key)) throw ConfigError("duplicate key", key, at.line, at.column);
      doc[key] = std::move(value);
      where[key] = at;
    }
  }

private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }
  Located here() const { return {line_, static_cast<int>(pos_ - line_start_) + 1}; }
  [[noreturn]] void fail(const std::string& message) const {
    const Located at = here();
    throw ConfigError(message, "", at.line, at.column);
  }

  // Skips spaces, tabs, carriage returns and comments; newlines too when asked.
  void skip_blank(bool newlines) {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '#') {
        while (!eof() && peek() != '\n') ++pos_;
      } else if (c == '\n' && newlines) {
        ++pos_;
        ++line_;
        line_start_ = pos_;
      } else {
        return;
      }
    }
  }

  static bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

  std::string read_key() {
    const std::size_t start = pos_;
    while (!eof() && word_char(peek())) ++pos_;
    if (pos_ == start) fail("expected a key");
    return s_.substr(start, pos_ - start);
  }

  bool take_word(const std::string& word) {
    if (s_.compare(pos_, word.size(), word) != 0) return false;
    const std::size_t end = pos_ + word.size();
    if (end < s_.size() && word_char(s_[end])) return false;
    pos_ = end;
    return true;
  }

  json read_value() {
    if (eof() || peek() == '\n' || peek() == '#') fail("missing value");
    if (peek() == '"') return read_string();
    if (peek() == '[') return read_array();
    if (take_word("true")) return true;
    if (take_word("false")) return false;
    if (take_word("pi") || take_word("\xCF\x80")) return std::numbers::pi;
    return read_number();
  }

  json read_string() {
    ++pos_;
    std::string out;
    while (!eof() && peek() != '"') {
      char c = peek();
      if (c == '\n') fail("unterminated string");
      if (c == '\\') {
        ++pos_;
        if (eof()) fail("unterminated string");
        switch (peek()) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail("unsupported escape");
        }
      }
      out += c;
      ++pos_;
    }
    if (eof()) fail("unterminated string");
    ++pos_;
    return out;
  }

  json read_array() {
    ++pos_;
    json out = json::array();
    for (;;) {
      skip_blank(true);
      if (eof()) fail("unterminated array");
      if (peek() == ']') {
        ++pos_;
        return out;
      }
      out.push_back(read_value());
      skip_blank(true);
      if (eof()) fail("unterminated array");
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ']') {
        fail("expected ',' or ']'");
      }
    }
  }

  json read_number() {
    const std::size_t start = pos_;
    bool negative = false;
    if (peek() == '+' || peek() == '-') {
      negative = peek() == '-';
      ++pos_;
      if (take_word("pi") || take_word("\xCF\x80")) return negative ? -std::numbers::pi : std::numbers::pi;
    }
    bool integral = true;
    while (!eof()) {
      const char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
      } else if (c == '.' || c == 'e' || c == 'E') {
        integral = false;
      } else if ((c == '+' || c == '-') && (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E')) {
      } else {
        break;
      }
      ++pos_;
    }
    const char* first = s_.data() + start + (s_[start] == '+' ? 1 : 0);
    const char* last = s_.data() + pos_;
    if (integral) {
      long long v = 0;
      const auto r = std::from_chars(first, last, v);
      if (r.ec == std::errc() && r.ptr == last) return v;
      std::uint64_t u = 0;
      const auto ru = std::from_chars(first, last, u);
      if (ru.ec == std::errc() && ru.ptr == last) return u;
    } else {
      double v = 0.0;
      const auto r = std::from_chars(first, last, v);
      if (r.ec == std::errc() && r.ptr == last) return v;
    }
    pos_ = start;
    fail("invalid value");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::size_t line_start_ = 0;
};

Located locate(const std::string& text, std::size_t offset) {
  Located at{1, 1};
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++at.line;
      at.column = 1;
    } else {
      ++at.column;
    }
  }
  return at;
}

class Reader {
public:
  explicit Reader(const Positions& where) : where_(where) {}

  [[noreturn]] void bad(const std::string& key, const std::string& message) const {
    const auto it = where_.find(key);
    const Located at = it == where_.end() ? Located{} : it->second;
    throw ConfigError(message, key, at.line, at.column);
  }

  double number(const json& v, const std::string& key) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && (v == "pi" || v == "\xCF\x80")) return std::numbers::pi;
    bad(key, "expected a number");
  }

  long long integer(const json& v, const std::string& key) const {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 1e15) return static_cast<long long>(d);
    }
    bad(key, "expected an integer");
  }

  int small_integer(const json& v, const std::string& key) const {
    const long long x = integer(v, key);
    if (x < -1000000000LL || x > 1000000000LL) bad(key, "integer out of range");
    return static_cast<int>(x);
  }

  std::uint64_t seed(const json& v, const std::string& key) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const long long x = integer(v, key);
    if (x < 0) bad(key, "seeds must be nonnegative");
    return static_cast<std::uint64_t>(x);
  }

  bool boolean(const json& v, const std::string& key) const {
    if (!v.is_boolean()) bad(key, "expected true or false");
    return v.get<bool>();
  }

  template <class T, class Get>
  std::array<T, 3> triple(const json& v, const std::string& key, Get get) const {
    if (v.is_array()) {
      if (v.size() != 3) bad(key, "expected one value or a list of three");
      return {get(v[0], key), get(v[1], key), get(v[2], key)};
    }
    const T x = get(v, key);
    return {x, x, x};
  }

  std::vector<double> numbers(const json& v, const std::string& key) const {
    if (!v.is_array()) bad(key, "expected a list of numbers");
    std::vector<double> out;
    for (const json& x : v) out.push_back(number(x, key));
    return out;
  }

private:
  const Positions& where_;
};

// Validation failure before positions are attached.
struct Invalid {
  std::string field;
  std::string message;
};

[[noreturn]] void invalid(const std::string& field, const std::string& message) { throw Invalid{field, message}; }

void check_ranges(const RunConfig& c);

RunConfig read_config(const json& j, const Positions& where) {
  Reader r(where);
  if (!j.is_object()) r.bad("", "the configuration must be a table of keys");
  RunConfig c;
  const auto num = [&](const json& v, const std::string& k) { return r.number(v, k); };
  const auto small = [&](const json& v, const std::string& k) { return r.small_integer(v, k); };
  const std::map<std::string, std::function<void(const json&, const std::string&)>> keys{
      {"command",
       [&](const json& v, const std::string& k) {
         if (!v.is_string()) r.bad(k, "expected a string");
         try {
           c.command = command_from_string(v.get<std::string>());
         } catch (const ConfigError& e) {
           r.bad(k, "unknown command '" + v.get<std::string>() + "'");
         }
       }},
      {"grid", [&](const json& v, const std::string& k) { c.grid = r.triple<int>(v, k, small); }},
      {"box", [&](const json& v, const std::string& k) { c.box = r.triple<double>(v, k, num); }},
      {"origin", [&](const json& v, const std::string& k) { c.origin = r.triple<double>(v, k, num); }},
      {"tol", [&](const json& v, const std::string& k) { c.tol = num(v, k); }},
      {"inner_tol", [&](const json& v, const std::string& k) { c.inner_tol = num(v, k); }},
      {"eigen_tol", [&](const json& v, const std::string& k) { c.eigen_tol = num(v, k); }},
      {"bn_tol", [&](const json& v, const std::string& k) { c.bn_tol = num(v, k); }},
      {"plateau_tol", [&](const json& v, const std::string& k) { c.plateau_tol = num(v, k); }},
      {"max_iter", [&](const json& v, const std::string& k) { c.max_iter = small(v, k); }},
      {"seed", [&](const json& v, const std::string& k) { c.seeds = {r.seed(v, k)}; }},
      {"seeds",
       [&](const json& v, const std::string& k) {
         if (!v.is_array()) r.bad(k, "expected a list of seeds");
         c.seeds.clear();
         for (const json& x : v) c.seeds.push_back(r.seed(x, k));
       }},
      {"eigen_seed", [&](const json& v, const std::string& k) { c.eigen_seed = r.seed(v, k); }},
      {"lambda",
       [&](const json& v, const std::string& k) {
         if (v.is_null())
           c.lambda.reset();
         else
           c.lambda = num(v, k);
       }},
      {"lambdas", [&](const json& v, const std::string& k) { c.lambdas = r.numbers(v, k); }},
      {"count", [&](const json& v, const std::string& k) { c.count = small(v, k); }},
      {"eps",
       [&](const json& v, const std::string& k) {
         if (v.is_null())
           c.eps.reset();
         else
           c.eps = num(v, k);
       }},
      {"recenter_every", [&](const json& v, const std::string& k) { c.recenter_every = small(v, k); }},
      {"recenter_target", [&](const json& v, const std::string& k) { c.recenter_target = num(v, k); }},
      {"quotient_symmetries",
       [&](const json& v, const std::string& k) { c.quotient_symmetries = r.boolean(v, k); }},
      {"ansatz_start", [&](const json& v, const std::string& k) { c.ansatz_start = r.boolean(v, k); }},
      {"gap_samples", [&](const json& v, const std::string& k) { c.gap_samples = small(v, k); }},
      {"out",
       [&](const json& v, const std::string& k) {
         if (!v.is_string()) r.bad(k, "expected a string");
         c.out = v.get<std::string>();
       }},
      {"snapshot", [&](const json& v, const std::string& k) { c.snapshot = r.boolean(v, k); }},
      {"threads", [&](const json& v, const std::string& k) { c.threads = small(v, k); }},
  };
  if (j.contains("seed") && j.contains("seeds")) r.bad("seeds", "give either seed or seeds");
  for (const auto& [key, value] : j.items()) {
    const auto it = keys.find(key);
    if (it == keys.end()) r.bad(key, "unknown key");
    it->second(value, key);
  }
  try {
    check_ranges(c);
  } catch (const Invalid& e) {
    r.bad(e.field, e.message);
  }
  return c;
}


// ---- run helpers ----------------------------------------------------------

class Stages {
public:
  explicit Stages(RunManifest& m, std::ostream& log) : m_(m), log_(log) {}

  template <class F>
  auto operator()(const std::string& name, F&& f) {
    log_ << "[" << name << "] ..." << std::endl;
    const auto start = std::chrono::steady_clock::now();
    auto value = f();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    m_.stages.push_back({name, seconds, json::object()});
    log_ << "[" << name << "] done in " << seconds << " s" << std::endl;
    return value;
  }

  json& residuals() { return m_.stages.back().residuals; }

private:
  RunManifest& m_;
  std::ostream& log_;
};

json grid_json(const GridSpec& g) {
  return {{"cells", g.cells}, {"lengths", g.lengths}, {"origin", g.origin}};
}

GroundStateConfig descent_config(const RunConfig& c, std::uint64_t seed) {
  GroundStateConfig g;
  g.seed = seed;
  g.tol = c.tol;
  g.max_iter = c.max_iter;
  g.inner_tol = c.inner_tol;
  g.recenter_every = c.recenter_every;
  g.recenter_target = c.recenter_target;
  g.quotient_symmetries = c.quotient_symmetries;
  return g;
}

double oracle_eps(const RunConfig& c) {
  return c.eps ? *c.eps : *std::min_element(c.box.begin(), c.box.end()) / 16.0;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw ConfigError("cannot write " + path.string(), "out");
}

void snapshot(const RunConfig& c, const std::string& stem, const VectorField& u) {
  if (!c.snapshot) return;
  const fs::path dir = fs::path(c.out) / "snapshots";
  fs::create_directories(dir);
  write_raw(dir / stem, u);
  write_vtk(dir / (stem + ".vtk"), u, stem);
}

}  // namespace

json error_record(const std::exception& e) {
  json out{{"kind", "error"}, {"message", e.what()}};
  if (const auto* err = dynamic_cast<const Error*>(&e)) out["kind"] = err->kind();
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) {
    out["field"] = ce->field();
    out["line"] = ce->line();
    out["column"] = ce->column();
  }
  if (const auto* sf = dynamic_cast<const SolverFailure*>(&e)) {
    out["residual"] = sf->residual();
    out["iterations"] = sf->iterations();
  }
  return out;
}

namespace {

std::vector<EigenPair> eigenpairs(const RunConfig& c, const GridSpec& grid, Stages& stage) {
  EigenOptions eo;
  eo.tol = c.eigen_tol;
  eo.seed = c.eigen_seed;
  const EigenResult res = stage("eigenpairs", [&] { return curl_curl_eigs(grid, c.count, eo); });
  double worst = 0.0;
  for (const EigenPair& p : res.pairs) worst = std::max(worst, p.rayleigh_residual);
  stage.residuals() = {{"max_rayleigh_residual", worst}, {"iterations", res.iterations}};
  return res.pairs;
}

C0Reference c0_reference(const RunConfig& c, const GridSpec& grid, RunManifest& m, Stages& stage) {
  const GroundStateResult gs =
      stage("c0", [&] { return minimize_sphere(grid, descent_config(c, c.seeds.front())); });
  stage.residuals() = {{"gradient_norm", gs.gradient_norm}, {"chain_residual", gs.chain_residual}};
  const C0Reference ref = reference_from(gs);
  m.c0 = {{"c0", ref.c0},
          {"S_bar", ref.S_bar},
          {"converged", ref.converged},
          {"iterations", gs.iterations},
          {"seed", gs.seed}};
  m.flags["c0_not_converged"] = !ref.converged;
  return ref;
}

json bn_json(const BNResult& r) {
  json candidates = json::array();
  for (const BNCandidate& k : r.candidates)
    candidates.push_back({{"start", k.start},
                          {"c_lambda", k.c_lambda},
                          {"converged", k.converged},
                          {"iterations", k.iterations},
                          {"gradient_norm", k.gradient_norm}});
  json out{{"lambda", r.lambda},
           {"nu", r.nu},
           {"lambda_nu", r.lambda_nu},
           {"lambda_nu_minus_1", r.lambda_nu_minus_1},
           {"c_lambda", r.c_lambda},
           {"eigen_gap_bound", r.eigen_gap_bound},
           {"c0", r.c0},
           {"existence_predicted", r.existence_predicted},
           {"multiplicity_lower", r.multiplicity_lower},
           {"converged", r.converged},
           {"iterations", r.iterations},
           {"gradient_norm", r.gradient_norm},
           {"energy_identity_residual", r.energy_identity_residual},
           {"best_start", r.best_start},
           {"candidates", candidates}};
  if (r.ground_state) out["ray_residual"] = r.ground_state->residual_ray;
  return out;
}

BNConfig bn_config(const RunConfig& c) {
  BNConfig b;
  b.descent = descent_config(c, c.seeds.front());
  b.tol = c.bn_tol;
  b.ansatz_start = c.ansatz_start;
  return b;
}

int run_groundstate(const RunConfig& c, RunManifest& m, json& result, Stages& stage, std::ostream& log) {
  const GridSpec grid = grid_of(c);
  const GroundStateConfig base = descent_config(c, c.seeds.front());
  const std::vector<GroundStateResult> runs =
      stage("descent", [&] { return minimize_sphere_seeds(grid, base, c.seeds); });
  const double eps = oracle_eps(c);
  const double S_oracle = stage("sobolev_oracle", [&] { return sobolev_oracle(grid, eps); });

  const double h = std::min({grid.spacing(0), grid.spacing(1), grid.spacing(2)});
  const std::vector<double> radii{2.0 * h, 4.0 * h, 8.0 * h};
  json members = json::array(), residuals = json::array();
  bool not_converged = false, concentration = false, below_oracle = false;
  std::size_t best = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const GroundStateResult& r = runs[i];
    const ConcentrationReport cr =
        concentration_report({initial_field(grid, descent_config(c, r.seed)), r.v}, radii, 0.5);
    json history = json::array();
    for (const HistoryEntry& e : r.history) history.push_back(e.J);
    json conc{{"flagged", cr.flagged},
              {"ball_radii", cr.ball_radii},
              {"local_curl_mass", cr.local_curl_mass.back()},
              {"total_curl_mass", cr.total_curl_mass.back()},
              {"location", cr.location ? json(*cr.location) : json(nullptr)}};
    members.push_back({{"seed", r.seed},
                       {"S_bar_estimate", r.S_estimate},
                       {"J_min", r.point.J_value},
                       {"iterations", r.iterations},
                       {"converged", r.converged},
                       {"gradient_norm", r.gradient_norm},
                       {"chain_residual", r.chain_residual},
                       {"ray_residual", r.point.residual_ray},
                       {"radial_fraction", radial_fraction(r.point.u)},
                       {"margin_over_oracle", r.S_estimate - S_oracle},
                       {"recenterings", r.recenters.size()},
                       {"concentration", conc},
                       {"history_J", history}});
    residuals.push_back({{"seed", r.seed}, {"gradient_norm", r.gradient_norm}, {"chain_residual", r.chain_residual}});
    not_converged = not_converged || !r.converged;
    concentration = concentration || cr.flagged;
    below_oracle = below_oracle || (r.converged && r.S_estimate < S_oracle);
    if (r.S_estimate < runs[best].S_estimate) best = i;
    snapshot(c, "groundstate_seed" + std::to_string(r.seed), r.point.u);
    log << "seed " << r.seed << ": S_bar " << r.S_estimate << " J " << r.point.J_value << " iterations "
        << r.iterations << (r.converged ? "" : " (not converged)") << "\n";
  }
  m.stages.front().residuals = residuals;
  const GroundStateResult& b = runs[best];
  const json flags{{"not_converged", not_converged}, {"concentration", concentration}, {"below_oracle", below_oracle}};
  m.flags.update(flags);
  result = {{"command", "groundstate"},
            {"grid", grid_json(grid)},
            {"box", grid.lengths},
            {"seed", b.seed},
            {"S_bar_estimate", b.S_estimate},
            {"J_min", b.point.J_value},
            {"iterations", b.iterations},
            {"S_oracle", S_oracle},
            {"oracle_eps", eps},
            {"margin_over_oracle", b.S_estimate - S_oracle},
            {"flags", flags},
            {"runs", members}};
  log << "S_oracle " << S_oracle << "\n";
  if (below_oracle) return kExitInvariant;
  return not_converged ? kExitNotConverged : kExitOk;
}

int run_spectrum(const RunConfig& c, RunManifest&, json& result, Stages& stage, std::ostream& log) {
  const GridSpec grid = grid_of(c);
  EigenOptions eo;
  eo.tol = c.eigen_tol;
  eo.seed = c.eigen_seed;
  const EigenResult res = stage("eigenpairs", [&] { return curl_curl_eigs(grid, c.count, eo); });
  const std::vector<Cluster> ladder = clusters(res);
  json values = json::array(), residuals = json::array();
  for (const EigenPair& p : res.pairs) {
    values.push_back(p.lambda_k);
    residuals.push_back(p.rayleigh_residual);
  }
  stage.residuals() = {{"rayleigh_residuals", residuals}, {"iterations", res.iterations}};
  for (std::size_t k = 0; k < res.pairs.size(); ++k) snapshot(c, "eigenfield_" + std::to_string(k), res.pairs[k].e_k);
  for (const Cluster& cl : ladder)
    log << "lambda " << cl.lambda << "  multiplicity " << cl.multiplicity << (cl.truncated ? " (truncated)" : "")
        << "\n";
  result = {{"command", "spectrum"},
            {"grid", grid_json(grid)},
            {"count", c.count},
            {"eigenvalues", values},
            {"rayleigh_residuals", residuals},
            {"ladder", json::parse(spectrum_json(ladder))},
            {"last_cluster_truncated", !ladder.empty() && ladder.back().truncated},
            {"next_lambda", res.next_lambda}};
  return kExitOk;
}

int run_bn(const RunConfig& c, RunManifest& m, json& result, Stages& stage, std::ostream& log) {
  const GridSpec grid = grid_of(c);
  const std::vector<EigenPair> pairs = eigenpairs(c, grid, stage);
  build_Vtilde(pairs, *c.lambda);  // fail early on an under-resolved spectrum
  const C0Reference ref = c0_reference(c, grid, m, stage);
  const BNResult r = stage("c_lambda", [&] { return compute_c_lambda(*c.lambda, pairs, ref, bn_config(c)); });
  stage.residuals() = {{"gradient_norm", r.gradient_norm}, {"energy_identity_residual", r.energy_identity_residual}};
  const Interval window = existence_window(r.nu, r.lambda_nu, ref.S_bar, grid.volume(), r.lambda_nu_minus_1);
  const bool below_bound = r.c_lambda <= r.eigen_gap_bound + c.bn_tol;
  const bool below_c0 = r.c_lambda <= ref.c0 + c.bn_tol;
  const json flags{{"not_converged", !r.converged},
                   {"c0_not_converged", !ref.converged},
                   {"bound_violation", !(below_bound && below_c0)}};
  m.flags.update(flags);
  if (r.v) snapshot(c, "bn_v", *r.v);
  if (r.ground_state) snapshot(c, "bn_u", r.ground_state->u);
  log << "c_lambda " << r.c_lambda << "  bound " << r.eigen_gap_bound << "  c0 " << ref.c0 << "\n";
  result = bn_json(r);
  result["command"] = "bn";
  result["grid"] = grid_json(grid);
  result["S_bar"] = ref.S_bar;
  result["existence_window"] = {window.lo, window.hi};
  result["bound_check"] = {{"c_le_bound", below_bound}, {"c_le_c0", below_c0}};
  result["flags"] = flags;
  if (!(below_bound && below_c0)) return kExitInvariant;
  return r.converged && ref.converged ? kExitOk : kExitNotConverged;
}

int run_bn_sweep(const RunConfig& c, RunManifest& m, json& result, Stages& stage, std::ostream& log) {
  const GridSpec grid = grid_of(c);
  const std::vector<EigenPair> pairs = eigenpairs(c, grid, stage);
  build_Vtilde(pairs, c.lambdas.front());
  const C0Reference ref = c0_reference(c, grid, m, stage);
  const SweepReport s =
      stage("sweep", [&] { return sweep_c_lambda(c.lambdas, pairs, ref, bn_config(c), c.plateau_tol); });

  const auto has = [](const std::vector<int>& v, int i) { return std::find(v.begin(), v.end(), i) != v.end(); };
  json members = json::array(), failures = json::array(), residuals = json::array();
  std::set<int> failed;
  for (const auto& [i, message] : s.failures) {
    failed.insert(i);
    failures.push_back({{"index", i}, {"lambda", c.lambdas[static_cast<std::size_t>(i)]}, {"message", message}});
  }
  std::string csv = "lambda,nu,c_lambda,bound,c0,existence,multiplicity,flags\n";
  bool not_converged = false;
  for (std::size_t i = 0; i < s.results.size(); ++i) {
    const BNResult& r = s.results[i];
    const int k = static_cast<int>(i);
    std::vector<std::string> tags;
    if (failed.count(k)) tags.push_back("failed");
    if (!failed.count(k) && !r.converged) tags.push_back("not_converged");
    if (has(s.plateau, k)) tags.push_back("plateau");
    if (has(s.monotonicity_violations, k)) tags.push_back("monotonicity");
    if (has(s.bound_violations, k)) tags.push_back("bound");
    not_converged = not_converged || failed.count(k) || !r.converged;
    std::string joined;
    for (const std::string& t : tags) joined += (joined.empty() ? "" : ";") + t;
    json entry = failed.count(k) ? json{{"lambda", r.lambda}, {"failed", true}} : bn_json(r);
    entry["flags"] = tags;
    members.push_back(entry);
    residuals.push_back({{"lambda", r.lambda}, {"gradient_norm", r.gradient_norm}});
    char line[256];
    std::snprintf(line, sizeof line, "%.17g,%d,%.17g,%.17g,%.17g,%d,%d,%s\n", r.lambda, r.nu, r.c_lambda,
                  r.eigen_gap_bound, ref.c0, r.existence_predicted ? 1 : 0, r.multiplicity_lower, joined.c_str());
    csv += line;
    if (r.v) snapshot(c, "sweep_" + std::to_string(i) + "_v", *r.v);
    log << "lambda " << r.lambda << "  c_lambda " << r.c_lambda << (joined.empty() ? "" : "  [" + joined + "]")
        << "\n";
  }
  stage.residuals() = residuals;
  write_text(fs::path(c.out) / "sweep.csv", csv);

  const bool violations = !s.monotonicity_violations.empty() || !s.bound_violations.empty();
  const json flags{{"not_converged", not_converged},
                   {"c0_not_converged", !ref.converged},
                   {"monotonicity_violation", !s.monotonicity_violations.empty()},
                   {"bound_violation", !s.bound_violations.empty()}};
  m.flags.update(flags);
  result = {{"command", "bn-sweep"},
            {"grid", grid_json(grid)},
            {"c0", ref.c0},
            {"S_bar", ref.S_bar},
            {"members", members},
            {"monotonicity_violations", s.monotonicity_violations},
            {"bound_violations", s.bound_violations},
            {"plateau", s.plateau},
            {"epsilon_nu", s.epsilon_nu ? json(*s.epsilon_nu) : json(nullptr)},
            {"failures", failures},
            {"flags", flags}};
  if (violations) return kExitInvariant;
  return not_converged || !ref.converged ? kExitNotConverged : kExitOk;
}

int run_oracle(const RunConfig& c, RunManifest&, json& result, Stages& stage, std::ostream& log) {
  const GridSpec grid = grid_of(c);
  const double eps = oracle_eps(c);
  const double value = stage("sobolev_oracle", [&] { return sobolev_oracle(grid, eps); });
  log << "S_oracle " << value << "\n";
  result = {{"command", "sobolev-oracle"}, {"grid", grid_json(grid)}, {"eps", eps}, {"value", value}};
  return kExitOk;
}

int run_verify(const RunConfig& c, RunManifest& m, json& result, Stages& stage, std::ostream& log) {
  const GridSpec grid = grid_of(c);
  VerifyOptions o;
  o.seed = c.seeds.front();
  o.gap_samples = c.gap_samples;
  const std::vector<Check> checks = stage("invariants", [&] { return invariant_suite(grid, o); });
  log << format_checks(checks);
  json rows = json::array();
  bool all = true;
  for (const Check& k : checks) {
    rows.push_back({{"name", k.name}, {"value", k.value}, {"threshold", k.threshold}, {"pass", k.pass}});
    all = all && k.pass;
  }
  stage.residuals() = rows;
  m.flags["invariant_failure"] = !all;
  result = {{"command", "verify"}, {"grid", grid_json(grid)}, {"seed", o.seed}, {"checks", rows}, {"all_pass", all}};
  return all ? kExitOk : kExitInvariant;
}

}  // namespace

std::string to_string(Command command) {
  switch (command) {
    case Command::groundstate: return "groundstate";
    case Command::spectrum: return "spectrum";
    case Command::bn: return "bn";
    case Command::bn_sweep: return "bn-sweep";
    case Command::sobolev_oracle: return "sobolev-oracle";
    case Command::verify: return "verify";
  }
  return "unknown";
}

Command command_from_string(const std::string& name) {
  for (Command c : {Command::groundstate, Command::spectrum, Command::bn, Command::bn_sweep, Command::sobolev_oracle,
                    Command::verify})
    if (to_string(c) == name) return c;
  throw ConfigError("unknown command '" + name + "'", "command");
}

RunConfig parse_config(const std::string& text) { return parse_config(text, json::object()); }

RunConfig parse_config(const std::string& text, const json& overrides) {
  if (!overrides.is_object()) throw ConfigError("overrides must be a table of keys");
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  Positions where;
  json j;
  if (first != std::string::npos && text[first] == '{') {
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      const Located at = locate(text, e.byte > 0 ? e.byte - 1 : 0);
      throw ConfigError("invalid JSON", "", at.line, at.column);
    }
    if (j.is_object())
      for (const auto& item : j.items()) {
        const std::size_t offset = text.find("\"" + item.key() + "\"");
        if (offset != std::string::npos) where[item.key()] = locate(text, offset);
      }
  } else {
    j = TomlReader(text).parse(where);
  }
  if (j.is_object())
    for (const auto& [key, value] : overrides.items()) {
      if (key == "seed") j.erase("seeds");
      if (key == "seeds") j.erase("seed");
      j[key] = value;
      where.erase(key);
    }
  return read_config(j, where);
}

RunConfig config_from_json(const json& j) { return read_config(j, {}); }

json to_json(const RunConfig& c) {
  return {{"command", to_string(c.command)},
          {"grid", c.grid},
          {"box", c.box},
          {"origin", c.origin},
          {"tol", c.tol},
          {"inner_tol", c.inner_tol},
          {"eigen_tol", c.eigen_tol},
          {"bn_tol", c.bn_tol},
          {"plateau_tol", c.plateau_tol},
          {"max_iter", c.max_iter},
          {"seeds", c.seeds},
          {"eigen_seed", c.eigen_seed},
          {"lambda", c.lambda ? json(*c.lambda) : json(nullptr)},
          {"lambdas", c.lambdas},
          {"count", c.count},
          {"eps", c.eps ? json(*c.eps) : json(nullptr)},
          {"recenter_every", c.recenter_every},
          {"recenter_target", c.recenter_target},
          {"quotient_symmetries", c.quotient_symmetries},
          {"ansatz_start", c.ansatz_start},
          {"gap_samples", c.gap_samples},
          {"out", c.out},
          {"snapshot", c.snapshot},
          {"threads", c.threads}};
}

void validate(const RunConfig& c) {
  try {
    check_ranges(c);
  } catch (const Invalid& e) {
    throw ConfigError(e.message, e.field);
  }
}

namespace {

void check_ranges(const RunConfig& c) {
  for (int n : c.grid)
    if (n < 4) invalid("grid", "every axis needs at least 4 cells");
  for (double x : c.box)
    if (!(x > 0.0) || !std::isfinite(x)) invalid("box", "edge lengths must be positive");
  for (double x : c.origin)
    if (!std::isfinite(x)) invalid("origin", "origin must be finite");
  const std::pair<const char*, double> positive[]{{"tol", c.tol},
                                                  {"inner_tol", c.inner_tol},
                                                  {"eigen_tol", c.eigen_tol},
                                                  {"bn_tol", c.bn_tol},
                                                  {"plateau_tol", c.plateau_tol},
                                                  {"recenter_target", c.recenter_target}};
  for (const auto& [name, value] : positive)
    if (!(value > 0.0) || !std::isfinite(value)) invalid(name, "must be positive");
  if (c.eps && (!(*c.eps > 0.0) || !std::isfinite(*c.eps))) invalid("eps", "must be positive");
  if (c.max_iter < 1) invalid("max_iter", "must be at least 1");
  if (c.count < 1) invalid("count", "must be at least 1");
  if (c.recenter_every < 0) invalid("recenter_every", "must be nonnegative");
  if (c.gap_samples < 1) invalid("gap_samples", "must be at least 1");
  if (c.threads < 0) invalid("threads", "must be nonnegative");
  if (c.seeds.empty()) invalid("seeds", "need at least one seed");
  if (c.out.empty()) invalid("out", "output directory must be named");
  if (c.lambda && (!(*c.lambda <= 0.0) || !std::isfinite(*c.lambda))) invalid("lambda", "must be <= 0");
  for (double l : c.lambdas)
    if (!(l <= 0.0) || !std::isfinite(l)) invalid("lambdas", "every member must be <= 0");
  for (std::size_t i = 0; i + 1 < c.lambdas.size(); ++i)
    if (!(c.lambdas[i] < c.lambdas[i + 1])) invalid("lambdas", "must be strictly ascending");
  if (c.command == Command::bn && !c.lambda) invalid("lambda", "bn needs lambda");
  if (c.command == Command::bn_sweep && c.lambdas.empty()) invalid("lambdas", "bn-sweep needs lambdas");
}

}  // namespace

GridSpec grid_of(const RunConfig& c) {
  GridSpec g;
  g.cells = c.grid;
  g.lengths = c.box;
  g.origin = c.origin;
  g.validate();
  return g;
}

json to_json(const RunManifest& m) {
  json stages = json::array();
  for (const StageRecord& s : m.stages)
    stages.push_back({{"name", s.name}, {"seconds", s.seconds}, {"residuals", s.residuals}});
  return {{"config", m.config}, {"version", m.version},   {"stages", stages}, {"environment", m.environment},
          {"c0", m.c0},         {"error", m.error},       {"flags", m.flags}, {"exit_code", m.exit_code}};
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.config = j.at("config");
  m.version = j.at("version").get<std::string>();
  for (const json& s : j.at("stages"))
    m.stages.push_back({s.at("name").get<std::string>(), s.at("seconds").get<double>(), s.at("residuals")});
  m.environment = j.at("environment");
  m.c0 = j.at("c0");
  m.error = j.at("error");
  m.flags = j.at("flags");
  m.exit_code = j.at("exit_code").get<int>();
  return m;
}

json environment_fingerprint() {
  json env{{"compiler", __VERSION__},
           {"cplusplus", __cplusplus},
           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION)},
           {"fftw", std::string(fftw_version)},
           {"hardware_threads", std::thread::hardware_concurrency()},
           {"threads", thread_count()}};
  utsname u{};
  if (uname(&u) == 0) {
    env["system"] = u.sysname;
    env["release"] = u.release;
    env["machine"] = u.machine;
  }
  return env;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const UnderResolvedSpectrum*>(&e))
    return kExitConfig;
  if (dynamic_cast<const SolverFailure*>(&e) || dynamic_cast<const NumericalFailure*>(&e)) return kExitNotConverged;
  return kExitInvariant;
}

int run(const RunConfig& config, std::ostream& log) {
  RunManifest m;
  m.config = to_json(config);
  m.version = kVersion;
  m.flags = json::object();
  const fs::path out = config.out;
  try {
    validate(config);
    fs::create_directories(out);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << std::endl;
    return exit_code_for(e) == kExitInvariant ? kExitConfig : exit_code_for(e);
  }
  set_thread_count(config.threads);
  m.environment = environment_fingerprint();

  json result;
  int code = kExitOk;
  Stages stage(m, log);
  try {
    switch (config.command) {
      case Command::groundstate: code = run_groundstate(config, m, result, stage, log); break;
      case Command::spectrum: code = run_spectrum(config, m, result, stage, log); break;
      case Command::bn: code = run_bn(config, m, result, stage, log); break;
      case Command::bn_sweep: code = run_bn_sweep(config, m, result, stage, log); break;
      case Command::sobolev_oracle: code = run_oracle(config, m, result, stage, log); break;
      case Command::verify: code = run_verify(config, m, result, stage, log); break;
    }
  } catch (const std::exception& e) {
    code = exit_code_for(e);
    m.error = error_record(e);
    m.error["exit_code"] = code;
    log << "error (" << m.error["kind"].get<std::string>() << "): " << e.what() << std::endl;
  }
  m.exit_code = code;
  try {
    if (!m.error.is_null()) write_text(out / "error.json", m.error.dump(2) + "\n");
    if (!result.is_null()) write_text(out / "result.json", result.dump(2) + "\n");
    write_text(out / "manifest.json", to_json(m).dump(2) + "\n");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << std::endl;
    return kExitConfig;
  }
  log << "exit " << code << "\n";
  return code;
}

}  // namespace curlvar
