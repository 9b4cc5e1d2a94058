#pragma once

#include <gmpxx.h>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "selfsim/errors.hpp"
#include "selfsim/ifs/ifs_spec.hpp"
#include "selfsim/numerics/dyadic.hpp"

namespace selfsim::cli {

using json = nlohmann::json;
using numerics::Dyadic;
using numerics::parse_rational;
using numerics::PrecisionContext;

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"mahler", "height",        "overlap", "deltan", "sep-probe",   "near-overlap",
                                              "garsia", "scale-entropy", "phi",     "dim",    "lbphi-check", "sweep"};
  return names;
}

/// Everything one invocation needs. `ifs` is inline JSON after loading.
struct RunConfig {
  std::string command;
  json ifs;                      // null when the command needs none
  json params = json::object();
  std::uint64_t seed = 1;
  std::int64_t precision = 128;
  std::int64_t max_precision = 8192;
  unsigned threads = 1;
  std::optional<std::uint64_t> memory_cap;  // bytes
  std::string format = "json";
  std::string output;  // empty: the caller's stream

  PrecisionContext context() const { return PrecisionContext(precision, max_precision); }

  /// Reloadable form of the config (the output path is left out).
  json echo() const {
    json j;
    j["command"] = command;
    if (!ifs.is_null()) j["ifs"] = ifs;
    j["params"] = params;
    j["seed"] = seed;
    j["precision"] = precision;
    j["max_precision"] = max_precision;
    j["threads"] = threads;
    if (memory_cap) j["memory_cap"] = *memory_cap;
    j["format"] = format;
    return j;
  }

  void validate() const {
    if (std::find(command_names().begin(), command_names().end(), command) == command_names().end())
      throw ValidationError("unknown command '" + command + "'", "/command");
    if (format != "json" && format != "csv") throw ValidationError("format must be json or csv", "/format");
    if (precision < 16) throw ValidationError("precision must be at least 16 bits", "/precision");
    if (max_precision < precision) throw ValidationError("max_precision must be at least precision", "/max_precision");
    if (threads == 0) throw ValidationError("threads must be positive", "/threads");
    if (!params.is_object()) throw ValidationError("params must be an object", "/params");
  }
};

namespace detail {

inline std::string json_text(const json& v, const std::string& ptr) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return v.dump();
  throw ValidationError("expected a number or a numeric string", ptr);
}

inline std::uint64_t as_u64(const json& v, const std::string& ptr) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_string()) {
    try {
      std::size_t used = 0;
      auto s = v.get<std::string>();
      unsigned long long x = std::stoull(s, &used);
      if (used == s.size() && s.find('-') == std::string::npos) return x;
    } catch (const std::exception&) {
    }
  }
  throw ValidationError("expected a nonnegative integer", ptr);
}

}  // namespace detail

inline mpq_class rational_at(const json& v, const std::string& ptr) {
  try {
    return parse_rational(detail::json_text(v, ptr));
  } catch (const ValidationError& e) {
    throw ValidationError(e.what(), ptr);
  }
}

inline mpz_class integer_at(const json& v, const std::string& ptr) {
  mpq_class q = rational_at(v, ptr);
  if (q.get_den() != 1) throw ValidationError("expected an integer", ptr);
  return q.get_num();
}

inline algebra::IntPolynomial polynomial_at(const json& v, const std::string& ptr) {
  if (!v.is_array()) throw ValidationError("polynomial must be an array of coefficients, lowest degree first", ptr);
  std::vector<mpz_class> c;
  for (std::size_t i = 0; i < v.size(); ++i) c.push_back(integer_at(v[i], ptr + "/" + std::to_string(i)));
  return algebra::IntPolynomial(std::move(c));
}

/// Rational to a ball: nearest dyadic at `prec` bits with the rounding error as radius.
inline Dyadic dyadic_near(const mpq_class& q, std::int64_t prec, Dyadic* err) {
  return numerics::from_rational(q, prec, numerics::Round::Nearest, err);
}

/// A contraction ratio: {"rational": q}, {"decimal": x}, {"minpoly": [...], "isolator": {re, im, rad}},
/// or a bare rational string.
inline ifs::RealParameter lambda_at(const json& v, const std::string& ptr, const PrecisionContext& ctx) {
  if (v.is_string() || v.is_number()) return ifs::RealParameter::rational(rational_at(v, ptr));
  if (!v.is_object()) throw ValidationError("lambda must be an object", ptr);
  if (v.contains("rational")) return ifs::RealParameter::rational(rational_at(v["rational"], ptr + "/rational"));
  if (v.contains("decimal")) {
    mpq_class q = rational_at(v["decimal"], ptr + "/decimal");
    return ifs::RealParameter::approximate(numerics::Ball::from_rational(q, ctx.working_bits));
  }
  if (!v.contains("minpoly") || !v.contains("isolator"))
    throw ValidationError("lambda needs rational, decimal, or minpoly with isolator", ptr);
  auto poly = polynomial_at(v["minpoly"], ptr + "/minpoly");
  const json& iso = v["isolator"];
  const std::string iptr = ptr + "/isolator";
  if (!iso.is_object() || !iso.contains("re") || !iso.contains("rad"))
    throw ValidationError("isolator needs re, rad and optionally im", iptr);
  Dyadic e1, e2, e3;
  Dyadic re = dyadic_near(rational_at(iso["re"], iptr + "/re"), 96, &e1);
  Dyadic im = iso.contains("im") ? dyadic_near(rational_at(iso["im"], iptr + "/im"), 96, &e2) : Dyadic();
  mpq_class rq = rational_at(iso["rad"], iptr + "/rad");
  if (rq <= 0) throw ValidationError("isolator radius must be positive", iptr + "/rad");
  Dyadic rad = numerics::from_rational(rq, 96, numerics::Round::Ceil, &e3);
  try {
    return ifs::RealParameter::exact(algebra::AlgebraicNumber(poly, numerics::ComplexBall(re, im, rad + e1 + e2), ctx));
  } catch (const ValidationError& e) {
    std::string sub = e.pointer() == "/lambda" ? "" : e.pointer();
    throw ValidationError(e.what(), ptr + sub);
  }
}

/// Builds the IFS from {"field_minpoly", "embedding_index", "lambda", "translations", "probs"}.
/// `lambda_override` replaces the lambda entry (used by sweeps).
inline ifs::IFSSpec ifs_at(const json& v, const PrecisionContext& ctx, const std::string& ptr = "/ifs",
                           const json* lambda_override = nullptr) {
  if (!v.is_object()) throw ValidationError("ifs must be an object", ptr);
  static const std::set<std::string> known{"field_minpoly", "embedding_index", "lambda", "translations", "probs"};
  for (auto it = v.begin(); it != v.end(); ++it)
    if (!known.count(it.key())) throw ValidationError("unknown field '" + it.key() + "'", ptr + "/" + it.key());
  try {
    algebra::NumberField field;
    if (v.contains("field_minpoly")) {
      std::size_t k = v.contains("embedding_index") ? detail::as_u64(v["embedding_index"], ptr + "/embedding_index") : 1;
      field = algebra::NumberField(polynomial_at(v["field_minpoly"], ptr + "/field_minpoly"), k, ctx);
    }
    const std::size_t d = field.degree();
    if (!lambda_override && !v.contains("lambda")) throw ValidationError("lambda is required", ptr + "/lambda");
    ifs::RealParameter lam =
        lambda_override ? lambda_at(*lambda_override, "/lambda", ctx) : lambda_at(v["lambda"], ptr + "/lambda", ctx);
    if (!v.contains("translations") || !v["translations"].is_array())
      throw ValidationError("translations must be an array", ptr + "/translations");
    std::vector<algebra::FieldElement> t;
    const json& tv = v["translations"];
    for (std::size_t j = 0; j < tv.size(); ++j) {
      const std::string tp = ptr + "/translations/" + std::to_string(j);
      if (tv[j].is_array()) {
        if (tv[j].size() != d + 1) throw ValidationError("expected " + std::to_string(d) + " coordinates and a denominator", tp);
        std::vector<mpz_class> c;
        for (std::size_t i = 0; i < d; ++i) c.push_back(integer_at(tv[j][i], tp + "/" + std::to_string(i)));
        mpz_class den = integer_at(tv[j][d], tp + "/" + std::to_string(d));
        if (den <= 0) throw ValidationError("denominator must be positive", tp + "/" + std::to_string(d));
        t.emplace_back(std::move(c), std::move(den));
      } else {
        t.push_back(algebra::FieldElement::rational(rational_at(tv[j], tp), d));
      }
    }
    std::vector<mpq_class> p;
    if (v.contains("probs")) {
      const json& pv = v["probs"];
      if (!pv.is_array()) throw ValidationError("probs must be an array", ptr + "/probs");
      for (std::size_t j = 0; j < pv.size(); ++j) p.push_back(rational_at(pv[j], ptr + "/probs/" + std::to_string(j)));
    } else {
      for (std::size_t j = 0; j < t.size(); ++j) p.emplace_back(1, static_cast<unsigned long>(t.size()));
    }
    return ifs::IFSSpec(std::move(field), std::move(lam), std::move(t), std::move(p), ctx);
  } catch (const ValidationError& e) {
    const std::string& q = e.pointer();
    if (q.rfind(ptr, 0) == 0 || (lambda_override && q.rfind("/lambda", 0) == 0)) throw;
    throw ValidationError(e.what(), ptr + q);
  }
}

inline json read_json_file(const std::string& path, const std::string& ptr) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'", ptr);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("invalid JSON in '" + path + "': " + e.what(), ptr);
  }
}

/// Reads a config object. A relative "ifs_path" resolves against `base_dir`.
inline RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {}) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object", "");
  static const std::set<std::string> known{"command", "ifs",     "ifs_path",   "params", "seed",  "precision",
                                           "max_precision", "threads", "memory_cap", "format", "output"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ValidationError("unknown field '" + it.key() + "'", "/" + it.key());
  RunConfig c;
  if (j.contains("command")) {
    if (!j["command"].is_string()) throw ValidationError("command must be a string", "/command");
    c.command = j["command"].get<std::string>();
  }
  if (j.contains("ifs") && j.contains("ifs_path")) throw ValidationError("give either ifs or ifs_path", "/ifs_path");
  if (j.contains("ifs")) c.ifs = j["ifs"];
  if (j.contains("ifs_path")) {
    if (!j["ifs_path"].is_string()) throw ValidationError("ifs_path must be a string", "/ifs_path");
    std::filesystem::path p = j["ifs_path"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.ifs = read_json_file(p.string(), "/ifs_path");
  }
  if (j.contains("params")) c.params = j["params"];
  if (j.contains("seed")) c.seed = detail::as_u64(j["seed"], "/seed");
  if (j.contains("precision")) c.precision = static_cast<std::int64_t>(detail::as_u64(j["precision"], "/precision"));
  if (j.contains("max_precision"))
    c.max_precision = static_cast<std::int64_t>(detail::as_u64(j["max_precision"], "/max_precision"));
  if (j.contains("threads")) c.threads = static_cast<unsigned>(detail::as_u64(j["threads"], "/threads"));
  if (j.contains("memory_cap")) c.memory_cap = detail::as_u64(j["memory_cap"], "/memory_cap");
  if (j.contains("format")) {
    if (!j["format"].is_string()) throw ValidationError("format must be a string", "/format");
    c.format = j["format"].get<std::string>();
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ValidationError("output must be a string", "/output");
    c.output = j["output"].get<std::string>();
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  json j = read_json_file(path, "");
  return config_from_json(j, std::filesystem::path(path).parent_path());
}

}  // namespace selfsim::cli
