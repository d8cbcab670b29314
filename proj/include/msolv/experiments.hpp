#pragma once

// Named experiments behind the CLI.  Each one reads its parameters from an
// ExperimentConfig, runs a check against an independent oracle where one
// exists, and returns a JSON result with a pass verdict.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "msolv/constructions.hpp"
#include "msolv/crowell.hpp"
#include "msolv/dsl.hpp"
#include "msolv/fingroup.hpp"
#include "msolv/foxcalc.hpp"
#include "msolv/grpring.hpp"
#include "msolv/models.hpp"
#include "msolv/report.hpp"
#include "msolv/rng.hpp"

namespace msolv::experiments {

using fingroup::FiniteGroup;
using fingroup::GroupElem;
using fingroup::Index;
using fingroup::Subgroup;
using report::big;
using report::ExperimentResult;
using report::Json;
using zmodlin::residue_t;

/// Malformed or inconsistent configuration (exit code 2 at the CLI).
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      std::string t = trim(s.substr(start, i - start));
      if (!t.empty()) out.push_back(std::move(t));
      start = i + 1;
    }
  return out;
}

inline long long parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  std::size_t used = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': not an integer: " + text);
  }
  if (used != text.size()) throw ConfigError("'" + key + "': not an integer: " + text);
  return v;
}

inline bool is_prime(long long p) {
  if (p < 2) return false;
  for (long long d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

inline std::set<long long> parse_primes(const std::string& text) {
  std::set<long long> out;
  for (const auto& t : split(text, ',')) {
    const long long p = parse_int("primes", t);
    if (!is_prime(p)) throw ConfigError("'primes': " + t + " is not prime");
    out.insert(p);
  }
  if (out.empty()) throw ConfigError("'primes' must name at least one prime");
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  std::string experiment;
  std::set<long long> primes{2, 3};
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  bool timing = false;
  std::size_t cap = fingroup::kDefaultCap;
  std::map<std::string, std::string> params;

  bool has(const std::string& key) const { return params.count(key) != 0; }

  std::string str(const std::string& key, const std::string& def) const {
    auto it = params.find(key);
    return it == params.end() ? def : it->second;
  }

  long long integer(const std::string& key, long long def, long long lo, long long hi) const {
    auto it = params.find(key);
    const long long v = it == params.end() ? def : parse_int(key, it->second);
    if (v < lo || v > hi)
      throw ConfigError("'" + key + "' = " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    return v;
  }

  std::vector<long long> int_list(const std::string& key, const std::string& def, long long lo, long long hi) const {
    std::vector<long long> out;
    for (const auto& t : split(str(key, def), ',')) {
      const long long v = parse_int(key, t);
      if (v < lo || v > hi) throw ConfigError("'" + key + "': " + t + " out of range");
      out.push_back(v);
    }
    if (out.empty()) throw ConfigError("'" + key + "' is empty");
    return out;
  }

  /// ';'-separated list (group specs contain commas).
  std::vector<std::string> list(const std::string& key, const std::string& def) const {
    auto out = split(str(key, def), ';');
    if (out.empty()) throw ConfigError("'" + key + "' is empty");
    return out;
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : params)
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
        throw ConfigError("unknown parameter '" + k + "' for experiment " + experiment);
  }

  /// Echoed into every report.  Worker count and timing are left out so the
  /// bytes do not depend on them.
  Json echo() const {
    Json p = Json::object();
    for (const auto& [k, v] : params) p[k] = v;
    return Json{{"experiment", experiment},
                {"primes", report::int_array(std::vector<long long>(primes.begin(), primes.end()))},
                {"seed", big(BigInt(seed))},
                {"cap", static_cast<long long>(cap)},
                {"params", p}};
  }
};

/// Apply `key = value` lines.  '#' starts a comment line; blank lines are skipped.
inline void apply_config_text(ExperimentConfig& cfg, std::string_view text) {
  std::size_t line_no = 0;
  for (const auto& raw : [&] {
         std::vector<std::string> lines;
         std::string cur;
         for (char c : text) {
           if (c == '\n') {
             lines.push_back(cur);
             cur.clear();
           } else {
             cur += c;
           }
         }
         lines.push_back(cur);
         return lines;
       }()) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (key == "experiment") cfg.experiment = value;
    else if (key == "seed") {
      const long long s = parse_int(key, value);
      if (s < 0) throw ConfigError("'seed' must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "jobs") {
      const long long j = parse_int(key, value);
      if (j < 1 || j > 256) throw ConfigError("'jobs' must be in [1, 256]");
      cfg.jobs = static_cast<unsigned>(j);
    } else if (key == "cap") {
      const long long c = parse_int(key, value);
      if (c < 1) throw ConfigError("'cap' must be positive");
      cfg.cap = static_cast<std::size_t>(c);
    } else if (key == "primes") cfg.primes = parse_primes(value);
    else if (key == "timing") cfg.timing = value == "true" || value == "1";
    else cfg.params[key] = value;
  }
}

// ---------------------------------------------------------------------------
// Shared helpers

inline dsl::Materialized load_group(const std::string& text, std::size_t cap) {
  return dsl::materialize(*dsl::parse_group_dsl(text), cap);
}

inline std::string canonical(const std::string& text) { return dsl::print(*dsl::parse_group_dsl(text)); }

inline std::string element_text(const GroupElem& e) {
  const auto& d = e.data();
  if (e.kind() == GroupElem::Kind::permutation) {
    std::string out;
    std::vector<char> seen(d.size(), 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (seen[i] || d[i] == static_cast<std::int64_t>(i)) continue;
      out += "(";
      for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(d[j])) {
        seen[j] = 1;
        if (out.back() != '(') out += " ";
        out += std::to_string(j);
      }
      out += ")";
    }
    return out.empty() ? "()" : out;
  }
  std::string out = "[";
  for (std::size_t i = 0; i < e.degree(); ++i) {
    out += i ? ",[" : "[";
    for (std::size_t j = 0; j < e.degree(); ++j) out += (j ? "," : "") + std::to_string(d[i * e.degree() + j]);
    out += "]";
  }
  return out + "]";
}

inline std::vector<Index> sorted_elements(const Subgroup& s) {
  auto v = s.elements;
  std::sort(v.begin(), v.end());
  return v;
}

/// All-pairs commutator subgroup.
inline Subgroup brute_commutator(const Subgroup& h) {
  const FiniteGroup& g = h.parent;
  std::set<Index> comms;
  for (Index a : h.elements)
    for (Index b : h.elements) comms.insert(g.commutator(a, b));
  const std::vector<Index> gens(comms.begin(), comms.end());
  return fingroup::generate(g, gens);
}

/// Brute derived series until it stabilizes.
inline std::vector<Subgroup> brute_derived_series(const FiniteGroup& g) {
  std::vector<Subgroup> out{fingroup::whole_group(g)};
  for (;;) {
    Subgroup next = brute_commutator(out.back());
    if (next.order() == out.back().order()) break;
    out.push_back(std::move(next));
  }
  return out;
}

inline Index brute_centralizer_order(const FiniteGroup& g, Index x) {
  Index c = 0;
  for (Index b = 0; b < g.order(); ++b) c += g.mul(x, b) == g.mul(b, x);
  return c;
}

inline constexpr const char* kDefaultCorpus =
    "builtin C4; builtin S3; builtin C6; builtin D8; builtin Q8; builtin A4; builtin D12; builtin S4; "
    "semidirect(builtin C7, builtin C3, action=[[[2]]]); builtin counterexample";

inline std::vector<models::NamedGroup> load_corpus(const ExperimentConfig& cfg, const std::string& def) {
  std::vector<models::NamedGroup> out;
  for (const auto& text : cfg.list("groups", def)) out.push_back({canonical(text), load_group(text, cfg.cap).group});
  return out;
}

/// Solvable groups of order at most 72 used as random Fox quotients.
inline std::vector<models::NamedGroup> small_solvable_corpus() {
  std::vector<models::NamedGroup> out;
  for (const char* t : {"perm 4 : (0 1), (2 3)", "builtin S3", "builtin C6", "builtin D8", "builtin Q8",
                        "builtin A4", "builtin D12", "builtin S4", "semidirect(builtin C7, builtin C3, action=[[[2]]])",
                        "builtin counterexample"})
    out.push_back({t, load_group(t, fingroup::kDefaultCap).group});
  return out;
}

/// r random elements of q that generate it (r is raised until they do).
inline std::vector<Index> random_generating_tuple(const FiniteGroup& q, int r, Rng& rng) {
  for (int attempt = 0;; ++attempt) {
    std::vector<Index> imgs;
    for (int i = 0; i < r; ++i) imgs.push_back(static_cast<Index>(rng.below(q.order())));
    if (fingroup::generate(q, imgs).order() == q.order()) return imgs;
    if (attempt > 200) {
      ++r;
      attempt = 0;
    }
  }
}

inline foxcalc::QuotientContext context_for(const dsl::Materialized& m, residue_t n) {
  if (m.group.num_generators() == 0) throw PreconditionViolated("group needs at least one generator");
  return foxcalc::QuotientContext(m.group, m.group.generators(), n);
}

inline Json vec_json(const std::vector<residue_t>& v) { return report::int_array(v); }

// ---------------------------------------------------------------------------
// Experiments

inline ExperimentResult run_counterexample(const ExperimentConfig& cfg) {
  cfg.allow({});
  const auto b = constructions::build_counterexample();
  Json series = Json::array();
  for (const auto& s : fingroup::derived_series(b.group)) series.push_back(static_cast<long long>(s.order()));
  Json iso_images = Json::array();
  for (Index s : b.d8.generators()) iso_images.push_back(static_cast<long long>(b.iso(s)));
  const bool iso_ok = b.iso.verify() && b.iso.is_injective() && b.iso.is_surjective();
  ExperimentResult r{"counterexample"};
  r.result = {
      {"group",
       {{"order", static_cast<long long>(b.group.order())},
        {"center_order", static_cast<long long>(b.center_order)},
        {"derived_length", static_cast<long long>(b.derived_length)},
        {"derived_series_orders", series}}},
      {"quotient",
       {{"order", static_cast<long long>(b.quotient.group.order())},
        {"center_order", static_cast<long long>(b.quotient_center_order)},
        {"isomorphic_to_d8", iso_ok},
        {"d8_generator_images", iso_images}}},
  };
  r.pass = b.group.order() == 72 && b.center_order == 1 && b.quotient.group.order() == 8 &&
           b.quotient_center_order == 2 && iso_ok;
  return r;
}

inline ExperimentResult run_derived_series(const ExperimentConfig& cfg) {
  cfg.allow({"group", "oracle_max_order"});
  const std::string text = cfg.str("group", "builtin counterexample");
  const auto limit = cfg.integer("oracle_max_order", 5000, 1, 1'000'000);
  const auto m = load_group(text, cfg.cap);
  const auto series = fingroup::derived_series(m.group);
  Json orders = Json::array();
  for (const auto& s : series) orders.push_back(static_cast<long long>(s.order()));
  const auto len = fingroup::derived_length(m.group);
  ExperimentResult r{"derived-series"};
  r.result = {{"group", canonical(text)},
              {"order", static_cast<long long>(m.group.order())},
              {"orders", orders},
              {"solvable", len.has_value()},
              {"derived_length", len ? Json(static_cast<long long>(*len)) : Json(nullptr)}};
  bool agree = true;
  if (m.group.order() <= limit) {
    const auto brute = brute_derived_series(m.group);
    agree = brute.size() == series.size();
    for (std::size_t k = 0; agree && k < brute.size(); ++k)
      agree = sorted_elements(brute[k]) == sorted_elements(series[k]);
    r.result["oracle"] = agree ? "agree" : "disagree";
  } else {
    r.result["oracle"] = "skipped";
  }
  r.pass = agree;
  return r;
}

inline ExperimentResult run_msolv_quotient(const ExperimentConfig& cfg) {
  cfg.allow({"group", "m"});
  const std::string text = cfg.str("group", "builtin counterexample");
  const auto mm = static_cast<std::size_t>(cfg.integer("m", 2, 0, 64));
  const auto g = load_group(text, cfg.cap).group;
  const auto q = fingroup::m_step_quotient(g, mm);
  const Subgroup term = fingroup::derived_term(fingroup::whole_group(g), mm);
  const Index brute_center = constructions::brute_center_order(q.group);
  const Index center = static_cast<Index>(fingroup::center(q.group).order());
  const auto qlen = fingroup::derived_length(q.group);

  // Oracle: all-pairs derived series.
  const auto brute = brute_derived_series(g);
  const Subgroup& brute_term = brute[std::min(mm, brute.size() - 1)];
  const bool term_ok = sorted_elements(brute_term) == sorted_elements(term);

  ExperimentResult r{"msolv-quotient"};
  r.result = {{"group", canonical(text)},
              {"m", static_cast<long long>(mm)},
              {"group_order", static_cast<long long>(g.order())},
              {"derived_term_order", static_cast<long long>(term.order())},
              {"quotient_order", static_cast<long long>(q.group.order())},
              {"center_order", static_cast<long long>(center)},
              {"abelian_invariants", report::int_array(fingroup::abelian_invariants(q.group))},
              {"quotient_derived_length", qlen ? Json(static_cast<long long>(*qlen)) : Json(nullptr)},
              {"oracle_term_agrees", term_ok},
              {"oracle_center_agrees", brute_center == center}};
  r.pass = term_ok && brute_center == center && qlen && *qlen <= mm;
  return r;
}

inline ExperimentResult run_centralizer(const ExperimentConfig& cfg) {
  cfg.allow({"group", "element"});
  const std::string text = cfg.str("group", "builtin S4");
  const auto m = load_group(text, cfg.cap);
  std::vector<std::pair<std::string, Index>> targets;
  if (cfg.has("element")) {
    if (m.generators.empty()) throw ConfigError("group has no generators to model the element on");
    const auto e = dsl::parse_element(cfg.str("element", ""), m.generators[0]);
    const auto idx = fingroup::index_of(m.group, e);
    if (!idx) throw ConfigError("element is not in the group");
    targets.emplace_back(element_text(e), *idx);
  } else {
    for (std::size_t k = 0; k < m.generators.size(); ++k)
      targets.emplace_back(element_text(m.generators[k]), m.group.generators()[k]);
  }
  ExperimentResult r{"centralizer"};
  r.pass = true;
  Json rows = Json::array();
  for (const auto& [name, idx] : targets) {
    const std::vector<Index> s{idx};
    const auto c = fingroup::centralizer(m.group, s).order();
    const auto b = brute_centralizer_order(m.group, idx);
    rows.push_back({{"element", name}, {"centralizer_order", static_cast<long long>(c)},
                    {"oracle_agrees", c == b}});
    r.pass = r.pass && c == b;
  }
  const auto z = fingroup::center(m.group).order();
  const auto zb = constructions::brute_center_order(m.group);
  r.pass = r.pass && z == zb;
  r.result = {{"group", canonical(text)},
              {"order", static_cast<long long>(m.group.order())},
              {"center_order", static_cast<long long>(z)},
              {"center_oracle_agrees", z == zb},
              {"centralizers", rows}};
  return r;
}

inline ExperimentResult run_fox(const ExperimentConfig& cfg) {
  cfg.allow({"group", "n", "length", "random", "max_length"});
  const std::string text = cfg.str("group", "builtin S3");
  const auto n = static_cast<residue_t>(cfg.integer("n", 9, 2, 1'000'000));
  const auto length = static_cast<std::size_t>(cfg.integer("length", 6, 0, 12));
  const auto random = cfg.integer("random", 1000, 0, 1'000'000);
  const auto max_len = static_cast<std::size_t>(cfg.integer("max_length", 40, 0, 10'000));
  const auto m = load_group(text, cfg.cap);
  const auto ctx = context_for(m, n);
  Rng rng(derive_seed(cfg.seed, "fox"));

  std::size_t checked = 0;
  std::optional<std::pair<foxcalc::FreeWord, foxcalc::ExpansionReport>> bad;
  auto check = [&](const foxcalc::QuotientContext& c, const foxcalc::FreeWord& w) {
    auto rep = foxcalc::expansion_check(c, w);
    ++checked;
    if (!rep.pass && !bad) bad.emplace(w, rep);
  };
  for (std::size_t len = 0; len <= length; ++len)
    for (const auto& w : foxcalc::all_reduced_words(ctx.rank(), len)) check(ctx, w);
  const std::size_t exhaustive = checked;

  // Random words into random solvable quotients of order <= 72.
  const auto corpus = small_solvable_corpus();
  for (long long k = 0; k < random; ++k) {
    const auto& q = corpus[rng.below(corpus.size())];
    const int r = 2 + static_cast<int>(rng.below(2));
    foxcalc::QuotientContext rc(q.group, random_generating_tuple(q.group, r, rng), n);
    check(rc, foxcalc::random_word(rc.rank(), rng.below(max_len + 1), rng));
  }

  ExperimentResult r{"fox"};
  r.result = {{"group", canonical(text)},
              {"n", static_cast<long long>(n)},
              {"exhaustive_words", static_cast<long long>(exhaustive)},
              {"random_words", static_cast<long long>(checked - exhaustive)},
              {"failures", bad ? 1 : 0}};
  if (bad)
    r.result["witness"] = {{"word", bad->first.to_string()}, {"lhs", vec_json(bad->second.lhs)},
                           {"rhs", vec_json(bad->second.rhs)}};
  r.pass = !bad;
  return r;
}

inline ExperimentResult run_magnus(const ExperimentConfig& cfg) {
  cfg.allow({"group", "n", "length", "pairs", "max_length"});
  const std::string text = cfg.str("group", "builtin S3");
  const auto n = static_cast<residue_t>(cfg.integer("n", 9, 2, 1'000'000));
  const auto length = static_cast<std::size_t>(cfg.integer("length", 6, 0, 12));
  const auto pairs = cfg.integer("pairs", 500, 0, 1'000'000);
  const auto max_len = static_cast<std::size_t>(cfg.integer("max_length", 40, 0, 10'000));
  const auto m = load_group(text, cfg.cap);
  const auto ctx = context_for(m, n);
  Rng rng(derive_seed(cfg.seed, "magnus"));

  std::size_t words = 0;
  std::optional<std::string> bad_word, bad_pair;
  for (std::size_t len = 0; len <= length; ++len)
    for (const auto& w : foxcalc::all_reduced_words(ctx.rank(), len)) {
      ++words;
      const auto mi = crowell::magnus_image(ctx, w);
      if ((mi.top_left() != ctx.evaluate(w) || mi.top_right() != foxcalc::fox_row_flat(ctx, w)) && !bad_word)
        bad_word = w.to_string();
    }
  for (long long k = 0; k < pairs; ++k) {
    const auto u = foxcalc::random_word(ctx.rank(), rng.below(max_len + 1), rng);
    const auto v = foxcalc::random_word(ctx.rank(), rng.below(max_len + 1), rng);
    const auto mu = crowell::magnus_image(ctx, u), mv = crowell::magnus_image(ctx, v);
    const bool ok = crowell::magnus_image(ctx, u * v) == mu * mv &&
                    crowell::magnus_image(ctx, foxcalc::inverse(u)) == mu.inverse() &&
                    mu * mu.inverse() == crowell::MagnusMatrix::identity(ctx);
    if (!ok && !bad_pair) bad_pair = u.to_string() + " | " + v.to_string();
  }
  ExperimentResult r{"magnus"};
  r.result = {{"group", canonical(text)},
              {"n", static_cast<long long>(n)},
              {"consistency_words", static_cast<long long>(words)},
              {"homomorphism_pairs", pairs},
              {"consistency_ok", !bad_word},
              {"homomorphism_ok", !bad_pair}};
  if (bad_word) r.result["witness_word"] = *bad_word;
  if (bad_pair) r.result["witness_pair"] = *bad_pair;
  r.pass = !bad_word && !bad_pair;
  return r;
}

inline ExperimentResult run_crowell(const ExperimentConfig& cfg) {
  cfg.allow({"group", "n", "relators"});
  const std::string text = cfg.str("group", "builtin S3");
  const auto n = static_cast<residue_t>(cfg.integer("n", 9, 2, 1'000'000));
  const auto m = load_group(text, cfg.cap);
  const auto ctx = context_for(m, n);
  if (ctx.ring().dim() > 512) throw TooLarge("crowell experiment limited to |Q| <= 512");
  const auto cx = crowell::build_complex(ctx);
  const auto ex = crowell::exactness_check(cx);
  const auto schreier = crowell::schreier_relators(ctx);
  const auto sr = crowell::relation_module_check(ctx, schreier);

  ExperimentResult r{"crowell"};
  r.result = {{"group", canonical(text)},
              {"n", static_cast<long long>(n)},
              {"rank", ctx.rank()},
              {"image_equals_ker_s", ex.image_equals_kernel},
              {"s_surjective", ex.s_surjective},
              {"s_after_f_zero", ex.s_after_f_zero},
              {"image_size", big(ex.image_size)},
              {"ker_f_size", big(ex.ker_f_size)},
              {"schreier_relators", static_cast<long long>(schreier.size())},
              {"schreier_spans_ker_f", sr.spans_kernel}};
  r.pass = ex.pass && sr.relators_in_kernel && sr.spans_kernel;
  if (cfg.has("relators")) {
    std::vector<foxcalc::FreeWord> rels;
    for (const auto& t : cfg.list("relators", "")) rels.push_back(foxcalc::parse_word(t, ctx.rank()));
    const auto rr = crowell::relation_module_check(ctx, rels);
    // A proper span is data, not a failure: ker f may exceed the relation module.
    r.result["relators"] = {{"count", static_cast<long long>(rels.size())},
                            {"in_ker_f", rr.relators_in_kernel},
                            {"spans_ker_f", rr.spans_kernel},
                            {"span_size", big(rr.span_size)}};
    r.pass = r.pass && rr.relators_in_kernel;
  }
  return r;
}

inline ExperimentResult run_gtilde(const ExperimentConfig& cfg) {
  cfg.allow({"group", "x", "n", "l", "sigma"});
  const std::string text = cfg.str("group", "perm 3 : (0 1 2), (0 1)");
  const auto m = load_group(text, cfg.cap);
  if (m.generators.empty()) throw ConfigError("group has no generators");
  const auto xe = dsl::parse_element(cfg.str("x", element_text(m.generators[0])), m.generators[0]);
  const auto xi = fingroup::index_of(m.group, xe);
  if (!xi) throw ConfigError("x is not in the group");
  const auto l = cfg.integer("l", 3, 2, 1'000'000);
  if (!is_prime(l)) throw ConfigError("'l' must be prime");
  constructions::GTildeInstance inst{m.group, *xi, static_cast<residue_t>(cfg.integer("n", 1, 1, 1'000'000)),
                                     static_cast<residue_t>(l), static_cast<int>(cfg.integer("sigma", 2, 1, 30))};
  const auto rep = constructions::gtilde_experiment(inst);

  Json table = Json::array();
  for (const auto& p : rep.pairs)
    table.push_back({{"a", element_text(fingroup::element(m.group, p.a))},
                     {"c_exp", static_cast<long long>(p.c_exp)},
                     {"a_commutes", p.a_commutes},
                     {"feasible", p.feasible},
                     {"diagonal", p.diagonal}});
  ExperimentResult r{"gtilde"};
  r.result = {{"group", canonical(text)},
              {"x", element_text(xe)},
              {"u", static_cast<long long>(rep.u)},
              {"x_order", static_cast<long long>(rep.s)},
              {"modulus", static_cast<long long>(rep.modulus)},
              {"faithful", rep.faithful},
              {"reduction_injective", rep.reduction_injective},
              {"pairs", table},
              {"feasible_count", static_cast<long long>(rep.feasible_count)},
              {"feasible_implies_diagonal", rep.feasible_implies_diagonal},
              {"feasible_equals_diagonal", rep.feasible_equals_diagonal},
              {"witnesses_verified", rep.witnesses_verified}};
  r.pass = rep.pass;
  return r;
}

struct LemmaTally {
  std::size_t pass = 0, vacuous = 0, fail = 0;
  std::optional<Json> witness;
  void add(constructions::LemmaOutcome o, const zmodlin::ModMatrix& e, residue_t nt, residue_t l, int sigma) {
    using constructions::LemmaOutcome;
    if (o == LemmaOutcome::pass) ++pass;
    else if (o == LemmaOutcome::vacuous) ++vacuous;
    else {
      ++fail;
      if (!witness) witness = Json{{"matrix", vec_json(e.entries())}, {"ntilde", nt}, {"l", l}, {"sigma", sigma}};
    }
  }
  Json json() const {
    return {{"pass", static_cast<long long>(pass)}, {"vacuous", static_cast<long long>(vacuous)},
            {"fail", static_cast<long long>(fail)}};
  }
};

/// Every u x u matrix for u <= max_u, l in {2,3}, sigma <= 3, |ntilde| <= 12.
inline LemmaTally reduction_lemma_exhaustive(std::size_t max_u = 2) {
  LemmaTally t;
  for (residue_t l : {2, 3})
    for (int sigma = 1; sigma <= 3; ++sigma) {
      const residue_t mod = constructions::ipow(l, sigma);
      for (residue_t nt = -12; nt <= 12; ++nt) {
        if (nt == 0 || zmodlin::valuation(nt, l) >= sigma) continue;
        for (std::size_t u = 1; u <= max_u; ++u) {
          std::vector<residue_t> e(u * u, 0);
          for (;;) {
            zmodlin::ModMatrix mat(u, u, mod, e);
            t.add(constructions::reduction_lemma_check(mat, nt, l, sigma), mat, nt, l, sigma);
            std::size_t k = 0;
            while (k < e.size() && ++e[k] == mod) e[k++] = 0;
            if (k == e.size()) break;
          }
        }
      }
    }
  return t;
}

/// Random instances; half of them are drawn from the annihilator of ntilde
/// so that the hypothesis actually holds.
inline LemmaTally reduction_lemma_random(std::size_t count, std::size_t max_u, Rng& rng) {
  LemmaTally t;
  for (std::size_t k = 0; k < count; ++k) {
    const residue_t l = rng.below(2) ? 3 : 2;
    const int sigma = 1 + static_cast<int>(rng.below(4));
    const residue_t mod = constructions::ipow(l, sigma);
    residue_t nt = 0;
    while (nt == 0 || zmodlin::valuation(nt, l) >= sigma) nt = rng.between(-50, 50);
    const std::size_t u = 1 + rng.below(max_u);
    const residue_t g = std::gcd(((nt % mod) + mod) % mod, mod);
    const residue_t step = (k % 2 == 0) ? mod / g : 1;
    std::vector<residue_t> e(u * u);
    for (auto& x : e) x = static_cast<residue_t>(rng.below(static_cast<std::uint64_t>(mod))) * step % mod;
    zmodlin::ModMatrix mat(u, u, mod, e);
    t.add(constructions::reduction_lemma_check(mat, nt, l, sigma), mat, nt, l, sigma);
  }
  return t;
}

inline ExperimentResult run_reduction_lemma(const ExperimentConfig& cfg) {
  cfg.allow({"random", "max_u"});
  const auto count = static_cast<std::size_t>(cfg.integer("random", 1000, 0, 10'000'000));
  const auto max_u = static_cast<std::size_t>(cfg.integer("max_u", 6, 1, 32));
  Rng rng(derive_seed(cfg.seed, "reduction-lemma"));
  const auto ex = reduction_lemma_exhaustive();
  const auto rnd = reduction_lemma_random(count, max_u, rng);
  ExperimentResult r{"reduction-lemma"};
  r.result = {{"exhaustive", ex.json()}, {"random", rnd.json()}};
  if (ex.witness) r.result["witness"] = *ex.witness;
  else if (rnd.witness) r.result["witness"] = *rnd.witness;
  r.pass = ex.fail == 0 && rnd.fail == 0;
  return r;
}

struct KernelSweepTally {
  std::size_t checks = 0, skipped = 0, failures = 0;
  std::optional<Json> witness;
};

/// Sweep A in {Z/4, Z/9, (Z/9)[C3]} over Sigma-levels k*M <= max_level.
inline KernelSweepTally kernel_projection_sweep(const std::set<long long>& primes, Index max_level,
                                                const std::vector<long long>& ns) {
  KernelSweepTally t;
  std::vector<Index> levels;
  for (Index v = 1; v <= max_level; ++v)
    if (grpring::is_sigma_number(v, primes)) levels.push_back(v);
  struct Coeff {
    const char* name;
    FiniteGroup h;
    residue_t modulus;
  };
  const std::vector<Coeff> coeffs{{"Z/4", FiniteGroup(), 4},
                                  {"Z/9", FiniteGroup(), 9},
                                  {"(Z/9)[C3]", fingroup::cyclic_group(3), 9}};
  for (const auto& c : coeffs) {
    const grpring::CyclicTower tower(c.h, c.modulus, levels);
    for (long long n : ns) {
      const long long n_sigma = grpring::sigma_split(n, primes).sigma_part;
      for (Index k : levels)
        for (Index mm : levels) {
          if (static_cast<std::size_t>(k) * mm > max_level) continue;
          if (mm % n_sigma != 0) {
            ++t.skipped;
            continue;
          }
          ++t.checks;
          const auto rep = grpring::kernel_projection_check(tower, n, k, mm, primes);
          if (!rep.pass) {
            ++t.failures;
            if (!t.witness)
              t.witness = Json{{"coefficients", c.name}, {"n", n}, {"k", k}, {"M", mm},
                               {"projection", vec_json(*rep.witness)}};
          }
        }
    }
  }
  return t;
}

inline ExperimentResult run_kernel_projection(const ExperimentConfig& cfg) {
  cfg.allow({"max_level", "n"});
  const auto max_level = static_cast<Index>(cfg.integer("max_level", 27, 1, 64));
  const auto ns = cfg.int_list("n", "1,2,3,6", 1, 1'000'000);
  const auto t = kernel_projection_sweep(cfg.primes, max_level, ns);
  ExperimentResult r{"kernel-projection"};
  r.result = {{"max_level", static_cast<long long>(max_level)},
              {"n", ns},
              {"checks", static_cast<long long>(t.checks)},
              {"skipped_divisibility", static_cast<long long>(t.skipped)},
              {"failures", static_cast<long long>(t.failures)}};
  if (t.witness) r.result["witness"] = *t.witness;
  r.pass = t.failures == 0;
  return r;
}

struct TransferCheck {
  bool hom = false, conjugation_sum = false, index_power = false, transversal_independent = false;
  std::size_t fixed_classes = 0;
  bool ok() const { return hom && conjugation_sum && index_power && transversal_independent; }
};

/// Transfer against its defining formulas for one normal subgroup.
inline TransferCheck transfer_check(const FiniteGroup& g, const Subgroup& n, std::size_t transversals, Rng& rng) {
  TransferCheck c;
  const auto t = fingroup::transfer_map(g, n);
  c.hom = t.map.verify();
  std::vector<Index> local(g.order(), fingroup::kNoIndex);
  for (Index i = 0; i < n.order(); ++i) local[n.elements[i]] = i;
  const auto& nab = t.n_ab;
  // transfer(R_N(y)) = prod over the transversal of a^-1 y a, in N^ab.
  c.conjugation_sum = true;
  for (Index y : n.elements) {
    Index acc = FiniteGroup::identity();
    for (Index a : t.transversal) acc = nab.group.mul(acc, nab.projection(local[g.mul(g.mul(g.inv(a), y), a)]));
    if (acc != t.on_group[y]) c.conjugation_sum = false;
  }
  // On conjugation-fixed classes the transfer is the [G:N]-th power.
  c.index_power = true;
  const long long index = g.order() / static_cast<long long>(n.order());
  std::set<Index> fixed;
  for (Index y : n.elements) {
    const Index cls = nab.projection(local[y]);
    bool is_fixed = true;
    for (Index s : g.generators()) is_fixed = is_fixed && nab.projection(local[g.conj(s, y)]) == cls;
    if (!is_fixed) continue;
    fixed.insert(cls);
    if (t.on_group[y] != nab.group.pow(cls, index)) c.index_power = false;
  }
  c.fixed_classes = fixed.size();
  c.transversal_independent = true;
  std::vector<Index> reps;
  fingroup::left_coset_ids(g, n, &reps);
  for (std::size_t k = 0; k < transversals; ++k) {
    std::vector<Index> alt(reps.size());
    for (std::size_t i = 0; i < reps.size(); ++i) alt[i] = g.mul(reps[i], n.elements[rng.below(n.order())]);
    rng.shuffle(alt.begin(), alt.end());
    if (fingroup::transfer_map(g, n, alt).on_group != t.on_group) c.transversal_independent = false;
  }
  return c;
}

inline ExperimentResult run_transfer(const ExperimentConfig& cfg) {
  cfg.allow({"groups", "transversals", "max_order"});
  const auto transversals = static_cast<std::size_t>(cfg.integer("transversals", 3, 0, 1000));
  const auto max_order = cfg.integer("max_order", 200, 1, 100'000);
  Rng rng(derive_seed(cfg.seed, "transfer"));
  ExperimentResult r{"transfer"};
  r.pass = true;
  Json rows = Json::array();
  for (const auto& ng : load_corpus(cfg, kDefaultCorpus)) {
    if (ng.group.order() > max_order) throw ConfigError(ng.name + " exceeds max_order");
    std::size_t pairs = 0, good = 0;
    Json failures = Json::array();
    for (const auto& n : fingroup::normal_subgroups(ng.group)) {
      ++pairs;
      const auto c = transfer_check(ng.group, n, transversals, rng);
      if (c.ok()) ++good;
      else
        failures.push_back({{"n_order", static_cast<long long>(n.order())}, {"hom", c.hom},
                            {"conjugation_sum", c.conjugation_sum}, {"index_power", c.index_power},
                            {"transversal_independent", c.transversal_independent}});
    }
    rows.push_back({{"group", ng.name}, {"order", static_cast<long long>(ng.group.order())},
                    {"normal_subgroups", static_cast<long long>(pairs)}, {"passed", static_cast<long long>(good)},
                    {"failures", failures}});
    r.pass = r.pass && good == pairs;
  }
  r.result = {{"groups", rows}};
  return r;
}

inline ExperimentResult run_quotient_iso(const ExperimentConfig& cfg) {
  cfg.allow({"groups", "n"});
  const auto ns = cfg.int_list("n", "1,2", 0, 16);
  ExperimentResult r{"quotient-iso"};
  r.pass = true;
  Json rows = Json::array();
  std::optional<Json> witness;
  for (const auto& ng : load_corpus(cfg, "builtin S3; builtin D8; builtin Q8; builtin A4; builtin S4; builtin counterexample")) {
    std::size_t triples = 0, hyp = 0, bij = 0, bij_without = 0;
    for (const auto& k : fingroup::normal_subgroups(ng.group)) {
      const auto q = fingroup::quotient(ng.group, k);
      for (const auto& h : fingroup::normal_subgroups(q.group))
        for (long long n : ns) {
          ++triples;
          const auto rep = fingroup::quotient_iso_check(q.projection, h, static_cast<std::size_t>(n));
          if (rep.hypothesis) {
            ++hyp;
            if (rep.bijective) ++bij;
            else if (!witness)
              witness = Json{{"group", ng.name}, {"kernel_order", static_cast<long long>(k.order())},
                             {"h_order", static_cast<long long>(h.order())}, {"n", n}};
          } else if (rep.bijective) {
            ++bij_without;
          }
        }
    }
    rows.push_back({{"group", ng.name}, {"triples", static_cast<long long>(triples)},
                    {"hypothesis_holds", static_cast<long long>(hyp)}, {"bijective", static_cast<long long>(bij)},
                    {"bijective_without_hypothesis", static_cast<long long>(bij_without)}});
    r.pass = r.pass && hyp == bij;
  }
  r.result = {{"n", ns}, {"groups", rows}};
  if (witness) r.result["witness"] = *witness;
  return r;
}

inline Json centralizer_json(const models::CentralizerReport& c) {
  return {{"route", c.route},
          {"generator", c.generator},
          {"power", static_cast<long long>(c.power)},
          {"model_order", big(c.model_order)},
          {"centralizer_order", big(c.centralizer_order)},
          {"fixed_module_order", big(c.fixed_module_order)},
          {"linear_kernel_order", big(c.linear_kernel_order)},
          {"module_order", big(c.module_order)},
          {"x_order", static_cast<long long>(c.x_order)},
          {"top_cyclic", static_cast<long long>(c.top_cyclic)},
          {"sets_equal", c.sets_equal},
          {"product_decomposition", c.product_decomposition},
          {"conjugation_formula", c.conjugation_formula},
          {"module_is_ker_f", c.module_is_ker_f},
          {"sampled", static_cast<long long>(c.sampled)},
          {"sample_consistent", c.sample_consistent},
          {"pass", c.pass}};
}

/// Brute force when the top level closes within the cap, otherwise the
/// structural route over the level below.
inline models::CentralizerReport model_centralizer(int rank, residue_t e, int level, int i, residue_t n,
                                                   std::size_t cap, std::size_t sample,
                                                   std::optional<models::ModelSoundness>* soundness = nullptr) {
  try {
    const auto model = models::build_solv_model(rank, e, level, cap);
    if (soundness) *soundness = models::model_soundness(model);
    return models::centralizer_experiment(model, i, n);
  } catch (const CapExceeded&) {
    if (level < 3) throw;
  }
  const auto below = models::build_solv_model(rank, e, level - 1, cap);
  return models::centralizer_experiment_structural(below, i, n, sample);
}

inline ExperimentResult run_solv_model(const ExperimentConfig& cfg) {
  cfg.allow({"r", "e", "m", "i", "n", "sample"});
  const int rank = static_cast<int>(cfg.integer("r", 2, 1, 8));
  const auto e = static_cast<residue_t>(cfg.integer("e", 2, 2, 1000));
  const int level = static_cast<int>(cfg.integer("m", 2, 1, 8));
  const int i = static_cast<int>(cfg.integer("i", 1, 1, 8));
  const auto n = static_cast<residue_t>(cfg.integer("n", 1, 1, 1'000'000));
  const auto sample = static_cast<std::size_t>(cfg.integer("sample", 20000, 1, 10'000'000));
  std::optional<models::ModelSoundness> sound;
  const auto c = model_centralizer(rank, e, level, i, n, cfg.cap, sample, &sound);

  ExperimentResult r{"solv-model"};
  r.result = {{"note", "finite Magnus-matrix model; not claimed to be relatively free"},
              {"r", rank},
              {"e", static_cast<long long>(e)},
              {"m", level},
              {"centralizer", centralizer_json(c)}};
  r.pass = c.pass;
  if (sound) {
    r.result["soundness"] = {
        {"derived_length", sound->derived_length ? Json(static_cast<long long>(*sound->derived_length)) : Json(nullptr)},
        {"derived_length_ok", sound->derived_length_ok},
        {"abelian_invariants", report::int_array(sound->abelian_invariants)},
        {"abelianization_all_e", sound->abelianization_all_e},
        {"module_stable", sound->module_stable}};
    r.pass = r.pass && sound->derived_length_ok && sound->module_stable;
  }
  return r;
}

inline ExperimentResult run_centerfree_scan(const ExperimentConfig& cfg) {
  cfg.allow({"groups", "m"});
  const auto mm = static_cast<std::size_t>(cfg.integer("m", 2, 1, 16));
  ExperimentResult r{"centerfree-scan"};
  r.pass = true;
  Json rows = Json::array();
  for (const auto& ng : load_corpus(cfg, kDefaultCorpus)) {
    const auto e = models::centerfree_scan_one(ng, mm);
    const auto q = fingroup::m_step_quotient(ng.group, mm);
    const bool oracle = constructions::brute_center_order(ng.group) == e.center_order &&
                        constructions::brute_center_order(q.group) == e.quotient_center_order;
    rows.push_back({{"group", e.name},
                    {"order", static_cast<long long>(e.order)},
                    {"center_order", static_cast<long long>(e.center_order)},
                    {"quotient_order", static_cast<long long>(e.quotient_order)},
                    {"quotient_center_order", static_cast<long long>(e.quotient_center_order)},
                    {"center_free_not_preserved", e.flagged},
                    {"normal_subgroups_checked", static_cast<long long>(e.normal_count)},
                    {"all_actions_faithful", e.all_faithful},
                    {"unfaithful_n_order", e.unfaithful_n ? Json(static_cast<long long>(*e.unfaithful_n)) : Json(nullptr)},
                    {"quotient_center_in_image", e.center_in_image},
                    {"oracle_agrees", oracle}});
    r.pass = r.pass && oracle;
  }
  r.result = {{"m", static_cast<long long>(mm)}, {"groups", rows}};
  return r;
}

inline ExperimentResult run_surface(const ExperimentConfig& cfg) {
  cfg.allow({"genus", "punctures", "e"});
  const int genus = static_cast<int>(cfg.integer("genus", 2, 0, 64));
  const auto punctures = cfg.integer("punctures", 0, 0, 1000);
  const auto e = static_cast<residue_t>(cfg.integer("e", 2, 2, 64));
  const auto chi = models::euler_char(genus, punctures);
  ExperimentResult r{"surface"};
  r.result = {{"genus", genus}, {"punctures", punctures}, {"euler_characteristic", chi.chi},
              {"hyperbolic", chi.hyperbolic}};
  r.pass = true;
  if (punctures > 0) {
    r.result["free_rank"] = 2 * genus + punctures - 1;
    return r;
  }
  if (genus < 1) return r;
  const auto p = models::surface_presentation(genus);
  const auto ab = models::presentation_abelianization(p);
  r.result["relator"] = p.relators[0].to_string();
  r.result["abelianization"] = {{"free_rank", static_cast<long long>(ab.free_rank)},
                                {"torsion", report::int_array(ab.torsion)},
                                {"torsion_free", ab.torsion_free}};
  r.pass = ab.torsion_free && ab.free_rank == static_cast<std::size_t>(2 * genus);
  // Fox calculus in the abelian quotient (C_e)^{2g}, when small enough.
  BigInt qsize = 1;
  for (int k = 0; k < 2 * genus; ++k) qsize *= e;
  if (qsize <= 4096) {
    const auto q = models::abelian_level(2 * genus, e);
    foxcalc::QuotientContext ctx(q, q.generators(), e);
    const bool expansion = foxcalc::expansion_check(ctx, p.relators[0]).pass;
    const bool in_kernel = crowell::relator_kernel_check(ctx, p.relators);
    r.result["abelian_quotient"] = {{"order", big(qsize)}, {"expansion_identity", expansion},
                                    {"relator_in_ker_f", in_kernel}};
    r.pass = r.pass && expansion && in_kernel;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Dispatch

using Runner = ExperimentResult (*)(const ExperimentConfig&);

inline const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> r{
      {"counterexample", run_counterexample},   {"derived-series", run_derived_series},
      {"msolv-quotient", run_msolv_quotient},   {"centralizer", run_centralizer},
      {"fox", run_fox},                         {"magnus", run_magnus},
      {"crowell", run_crowell},                 {"gtilde", run_gtilde},
      {"reduction-lemma", run_reduction_lemma}, {"kernel-projection", run_kernel_projection},
      {"transfer", run_transfer},               {"quotient-iso", run_quotient_iso},
      {"solv-model", run_solv_model},           {"centerfree-scan", run_centerfree_scan},
      {"surface", run_surface},
  };
  return r;
}

inline Runner find_runner(const std::string& name) {
  for (const auto& [n, f] : registry())
    if (n == name) return f;
  return nullptr;
}

inline ExperimentResult run_one(const ExperimentConfig& cfg, Runner f) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult r = f(cfg);
  r.config = cfg.echo();
  if (cfg.timing)
    r.wall_time_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Run `cfg.experiment`, or every experiment with default parameters for
/// "suite".  Suite members run on `cfg.jobs` threads; results keep registry order.
inline std::vector<ExperimentResult> run(const ExperimentConfig& cfg) {
  if (cfg.experiment != "suite") {
    const Runner f = find_runner(cfg.experiment);
    if (!f) throw ConfigError("unknown experiment '" + cfg.experiment + "'");
    return {run_one(cfg, f)};
  }
  if (!cfg.params.empty()) throw ConfigError("suite takes no experiment parameters");
  const auto& reg = registry();
  std::vector<ExperimentResult> out(reg.size());
  std::vector<std::exception_ptr> errors(reg.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < reg.size();) {
      ExperimentConfig sub = cfg;
      sub.experiment = reg[k].first;
      try {
        out[k] = run_one(sub, reg[k].second);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(reg.size())));
  std::vector<std::jthread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  pool.clear();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace msolv::experiments
