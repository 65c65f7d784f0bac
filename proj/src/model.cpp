#include "qtrack/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qtrack {

namespace {

using nlohmann::json;

std::uint64_t fnv1a(std::uint64_t h, const char* s) {
  for (; *s; ++s) {
    h ^= static_cast<unsigned char>(*s);
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a_double(std::uint64_t h, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g|", v);
  return fnv1a(h, buf);
}

double require_number(const json& j, const std::string& key) {
  if (!j.contains(key)) throw std::invalid_argument("missing required key: " + key);
  if (!j.at(key).is_number()) throw std::invalid_argument("key is not a number: " + key);
  return j.at(key).get<double>();
}

std::optional<double> optional_number(const json& j, const std::string& key) {
  if (!j.contains(key)) return std::nullopt;
  if (!j.at(key).is_number()) throw std::invalid_argument("key is not a number: " + key);
  return j.at(key).get<double>();
}

}  // namespace

void ModelParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("invalid parameter: ") + name +
                                  " must be strictly positive");
  };
  positive(omega_m, "omega_m");
  positive(gamma_m, "gamma_m");
  positive(gamma_qba, "gamma_qba");
  positive(gamma_meas, "gamma_meas");
  if (!(n_th >= 0.0) || !std::isfinite(n_th))
    throw std::invalid_argument("invalid parameter: n_th must be >= 0");
  if (!(eta_det > 0.0 && eta_det <= 1.0))
    throw std::invalid_argument("invalid parameter: eta_det must lie in (0, 1]");
  if (gamma_meas > gamma_qba)
    throw std::invalid_argument(
        "invalid parameter: gamma_meas must not exceed gamma_qba "
        "(gamma_meas = eta_det * gamma_qba for an efficiency <= 1)");
  const double eta_meas = gamma_meas / (gamma_qba + gamma_m * n_th);
  if (eta_meas > 1.0)
    throw std::invalid_argument("invalid parameter: eta_meas exceeds 1");
}

std::uint64_t ModelParams::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  h = fnv1a(h, "qtrack-params-v1|");
  h = fnv1a_double(h, omega_m);
  h = fnv1a_double(h, gamma_m);
  h = fnv1a_double(h, n_th);
  h = fnv1a_double(h, gamma_qba);
  h = fnv1a_double(h, gamma_meas);
  h = fnv1a_double(h, eta_det);
  return h;
}

DerivedRates derive_rates(const ModelParams& p) {
  p.validate();
  DerivedRates r;
  r.omega_m = p.omega_m;
  r.gamma_m = p.gamma_m;
  r.n_th = p.n_th;
  r.gamma_qba = p.gamma_qba;
  r.gamma_meas = p.gamma_meas;
  r.eta_det = p.eta_det;

  r.gamma_th = p.gamma_m * p.n_th;
  r.diffusion = p.gamma_m * (p.n_th + 0.5) + p.gamma_qba;
  r.v_bath = p.n_th + 0.5 + p.gamma_qba / p.gamma_m;
  r.eta_meas = p.gamma_meas / (p.gamma_qba + r.gamma_th);
  r.v_steady =
      2.0 * r.v_bath / (1.0 + std::sqrt(1.0 + 16.0 * r.v_bath * p.gamma_meas / p.gamma_m));
  r.v_e_steady = r.v_steady + p.gamma_m / (4.0 * p.gamma_meas);
  r.alpha = 0.5 * p.gamma_m + 4.0 * p.gamma_meas * r.v_steady;
  r.lambda = 4.0 * p.gamma_meas * r.v_e_steady - 0.5 * p.gamma_m;
  r.params_hash = p.hash();
  return r;
}

namespace {

void parse_provenance(const json& j, ModelParams& p) {
  static const char* known[] = {"g0_hz",     "kappa_hz",      "n_cav",
                                "eta_c",     "q_factor",      "temperature_k",
                                "m_eff_kg",  "x_zpf_m",       "detuning_hz"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || (it.key() == k);
    if (!ok) throw std::invalid_argument("unknown provenance key: " + it.key());
  }
  Provenance& pr = p.provenance;
  if (auto v = optional_number(j, "g0_hz")) pr.g0 = hz_to_rad(*v);
  if (auto v = optional_number(j, "kappa_hz")) pr.kappa = hz_to_rad(*v);
  pr.n_cav = optional_number(j, "n_cav");
  pr.eta_c = optional_number(j, "eta_c");
  pr.q_factor = optional_number(j, "q_factor");
  pr.temperature_k = optional_number(j, "temperature_k");
  pr.m_eff_kg = optional_number(j, "m_eff_kg");
  pr.x_zpf_m = optional_number(j, "x_zpf_m");
  if (auto v = optional_number(j, "detuning_hz")) pr.detuning = hz_to_rad(*v);
}

}  // namespace

ModelParams params_from_config(const std::string& document) {
  json j;
  try {
    j = json::parse(document);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");

  static const char* known[] = {"omega_m_hz", "gamma_m_hz",    "n_th",
                                "gamma_qba_hz", "gamma_meas_hz", "eta_det",
                                "provenance"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || (it.key() == k);
    if (!ok) throw std::invalid_argument("unknown config key: " + it.key());
  }

  ModelParams p;
  p.omega_m = hz_to_rad(require_number(j, "omega_m_hz"));
  p.gamma_m = hz_to_rad(require_number(j, "gamma_m_hz"));
  p.n_th = require_number(j, "n_th");
  p.eta_det = require_number(j, "eta_det");
  if (j.contains("provenance")) {
    if (!j.at("provenance").is_object())
      throw std::invalid_argument("provenance must be an object");
    parse_provenance(j.at("provenance"), p);
  }

  auto qba = optional_number(j, "gamma_qba_hz");
  auto meas = optional_number(j, "gamma_meas_hz");
  if (qba) p.gamma_qba = hz_to_rad(*qba);
  if (meas) p.gamma_meas = hz_to_rad(*meas);

  // Derive the optical rates from the cavity parameters when absent:
  // g = sqrt(n_cav) g0, gamma_qba = 4 g^2 / kappa, gamma_meas = eta_det * gamma_qba.
  if (!qba || !meas) {
    const Provenance& pr = p.provenance;
    if (pr.g0 && pr.kappa && pr.n_cav) {
      const double g2 = *pr.n_cav * (*pr.g0) * (*pr.g0);
      const double derived_qba = 4.0 * g2 / *pr.kappa;
      if (!qba) p.gamma_qba = derived_qba;
      if (!meas) p.gamma_meas = p.eta_det * derived_qba;
    } else {
      throw std::invalid_argument(
          "missing required key: gamma_qba_hz/gamma_meas_hz (or provenance "
          "g0_hz, kappa_hz, n_cav to derive them)");
    }
  }

  if (p.provenance.detuning && std::abs(*p.provenance.detuning) > 0.0)
    std::cerr << "warning: nonzero probe detuning is ignored by the dynamics "
                 "(resonant-probe model)\n";

  p.validate();
  return p;
}

ModelParams params_from_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return params_from_config(ss.str());
}

std::string params_to_config(const ModelParams& p) {
  json j;
  j["omega_m_hz"] = rad_to_hz(p.omega_m);
  j["gamma_m_hz"] = rad_to_hz(p.gamma_m);
  j["n_th"] = p.n_th;
  j["gamma_qba_hz"] = rad_to_hz(p.gamma_qba);
  j["gamma_meas_hz"] = rad_to_hz(p.gamma_meas);
  j["eta_det"] = p.eta_det;
  return j.dump(2) + "\n";
}

}  // namespace qtrack
