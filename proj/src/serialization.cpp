#include "parisi/serialization.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "parisi/errors.hpp"

namespace parisi {

Json to_json(const MixtureSpec& spec) {
  Json coeffs = Json::object();
  for (const auto& [p, g] : spec.coeffs()) coeffs[std::to_string(p)] = g;
  return Json{{"coeffs", coeffs}};
}

MixtureSpec mixture_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_object())
    throw ParseError("mixture JSON needs an object field \"coeffs\"");
  std::map<int, double> coeffs;
  for (const auto& [key, value] : j["coeffs"].items()) {
    int p = 0;
    try {
      size_t used = 0;
      p = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw ParseError("mixture JSON: degree \"" + key + "\" is not an integer");
    }
    if (!value.is_number()) throw ParseError("mixture JSON: coefficient of degree " + key + " is not a number");
    coeffs[p] = value.get<double>();
  }
  return MixtureSpec(std::move(coeffs));
}

Json to_json(const ParisiMeasure& measure) {
  if (const auto* step = std::get_if<StepCDF>(&measure)) {
    Json jumps = Json::array();
    for (const Jump& j : step->jumps()) jumps.push_back({j.q, j.m});
    return Json{{"type", "atomic"}, {"jumps", jumps}};
  }
  const auto& f = std::get<FrsbClosedForm>(measure);
  return Json{{"type", "frsb"}, {"q", f.q}, {"beta", f.beta}, {"mixture", to_json(f.spec)}};
}

ParisiMeasure measure_from_json(const Json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "atomic") {
      std::vector<Jump> jumps;
      for (const auto& pair : j.at("jumps")) {
        if (!pair.is_array() || pair.size() != 2) throw ParseError("measure JSON: jumps are [q, m] pairs");
        jumps.push_back({pair[0].get<double>(), pair[1].get<double>()});
      }
      return StepCDF(std::move(jumps));
    }
    if (type == "frsb")
      return FrsbClosedForm(mixture_from_json(j.at("mixture")), j.at("beta").get<double>(),
                            j.at("q").get<double>());
    throw ParseError("measure JSON: unknown type \"" + type + "\"");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("measure JSON: ") + e.what());
  }
}

Json to_json(const Certificate& c) {
  return Json{{"sup_f", c.sup_f},
              {"argmax_f", c.argmax_f},
              {"max_abs_f_on_support", c.max_abs_f_on_support},
              {"grid_size", c.grid_size},
              {"tol_sup", c.tol_sup},
              {"tol_supp", c.tol_supp},
              {"verdict", c.verdict}};
}

Json to_json(const ParisiSolution& sol) {
  Json atoms_json = Json::array();
  if (const auto* step = std::get_if<StepCDF>(&sol.measure))
    for (const auto& [q, mass] : atoms(*step)) atoms_json.push_back({{"location", q}, {"mass", mass}});
  Json out{{"regime", regime_label(sol)},
           {"measure", to_json(sol.measure)},
           {"atoms", atoms_json},
           {"cs_value", sol.cs_val},
           {"converged", sol.converged},
           {"certificate", to_json(sol.certificate)},
           {"diagnostics",
            {{"branch", sol.diagnostics.branch},
             {"notes", sol.diagnostics.notes},
             {"residuals", sol.diagnostics.residuals},
             {"rs_sup", sol.diagnostics.rs_sup}}}};
  if (const auto* f = std::get_if<FrsbClosedForm>(&sol.measure)) out["frsb_q"] = f->q;
  return out;
}

namespace {

Json to_json(const TemperatureWitness& w) {
  Json jumps = Json::array();
  for (const Jump& j : w.jumps) jumps.push_back({j.q, j.m});
  Json out{{"beta", w.beta},         {"regime", w.regime},       {"c", w.c},
           {"mass_at_zero", w.mass_at_zero}, {"jumps", jumps},  {"cs_value", w.cs_value},
           {"certified", w.certified}};
  if (w.frsb_q) out["frsb_q"] = *w.frsb_q;
  return out;
}

Json to_json(const PairStats& s, bool samples) {
  Json out{{"mean_abs", s.mean_abs},
           {"standard_error", s.standard_error},
           {"count", s.histogram.total()},
           {"bin_width", s.histogram.bin_width},
           {"histogram", s.histogram.counts}};
  if (samples) out["samples"] = s.samples;
  return out;
}

}  // namespace

Json to_json(const ChaosReport& r) {
  Json witnesses = Json::array();
  for (const auto& w : r.witnesses) witnesses.push_back(to_json(w));
  Json out{{"mode", r.mode},
           {"beta1", r.beta1},
           {"beta2", r.beta2},
           {"c1", r.c1},
           {"c2", r.c2},
           {"q0", r.q0},
           {"q0_resolution", r.q0_resolution},
           {"uncoupled", r.uncoupled},
           {"thm1_applicable", r.thm1_applicable},
           {"thm1_reason", r.thm1_reason},
           {"thm2_applicable", r.thm2_applicable},
           {"thm2_reason", r.thm2_reason},
           {"min_c_zero", r.min_c_zero},
           {"bullet_support", r.bullet_support},
           {"bullet_mass_at_zero", r.bullet_mass_at_zero},
           {"bullets_agree", r.bullets_agree},
           {"assert_generic", r.assert_generic},
           {"predicted_cross_support", r.predicted_cross_support},
           {"witnesses", witnesses},
           {"notes", r.notes},
           {"non_reproducibility", r.non_reproducibility}};
  if (r.scaled_gap_below_q1) out["scaled_gap_below_q1"] = *r.scaled_gap_below_q1;
  if (r.scaled_gap_at_q1) out["scaled_gap_at_q1"] = *r.scaled_gap_at_q1;
  if (r.open_conjecture) out["open_conjecture"] = *r.open_conjecture;
  return out;
}

Json to_json(const CovarianceReport& r) {
  Json pairs = Json::array();
  for (const auto& p : r.pairs)
    pairs.push_back({{"overlap", p.overlap},
                     {"target", p.target},
                     {"mean", p.mean},
                     {"standard_error", p.standard_error},
                     {"z", p.z}});
  return Json{{"pairs", pairs}, {"max_abs_z", r.max_abs_z}, {"passed", r.max_abs_z <= 4.0}};
}

Json to_json(const OverlapStats& s) {
  Json out{{"same_beta1", to_json(s.same1, false)},
           {"same_beta2", to_json(s.same2, false)},
           {"cross", to_json(s.cross, false)},
           {"cross_mean_abs", s.cross.mean_abs},
           {"acceptance_beta1", s.acceptance1},
           {"acceptance_beta2", s.acceptance2},
           {"warnings", s.warnings},
           {"non_reproducibility", s.non_reproducibility}};
  if (s.predictions)
    out["predicted_atoms"] = {{"same_beta1", s.predictions->same1},
                              {"same_beta2", s.predictions->same2},
                              {"cross", s.predictions->cross},
                              {"notes", s.predictions->notes},
                              {"overlay_only", true}};
  return out;
}

std::string histogram_csv(const Histogram& h, const std::string& manifest_hash) {
  std::ostringstream os;
  os << "# manifest " << manifest_hash << "\n";
  os << "bin_left,bin_right,count\n";
  char line[96];
  for (size_t i = 0; i < h.counts.size(); ++i) {
    std::snprintf(line, sizeof line, "%.2f,%.2f,%lld\n", i * h.bin_width, (i + 1) * h.bin_width,
                  h.counts[i]);
    os << line;
  }
  return os.str();
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunManifest::hash() const {
  const Json core{{"command", command},
                  {"parameters", parameters},
                  {"version", version},
                  {"master_seed", master_seed},
                  {"outputs", outputs}};
  return fnv1a_hex(core.dump());
}

Json RunManifest::to_json() const {
  return Json{{"command", command},   {"parameters", parameters}, {"version", version},
              {"master_seed", master_seed}, {"started", started},  {"finished", finished},
              {"outputs", outputs},   {"hash", hash()}};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace parisi
