#include "pidc/report.hpp"

namespace pidc {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json backbone_json(const std::map<int, double>& backbone) {
  json out = json::object();
  for (const auto& [m, v] : backbone) out[std::to_string(m)] = v;
  return out;
}

json atoms_json(const RedundancyLattice& lattice, const std::vector<double>& atoms,
                const std::vector<double>& redundancies) {
  json out = json::array();
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    out.push_back({{"antichain", lattice.antichain(i).to_string()},
                   {"m", lattice.degree_of_synergy(i)},
                   {"pi_bits", atoms[i]},
                   {"redundancy_bits", redundancies[i]}});
  }
  return out;
}

}  // namespace

json lattice_json(const RedundancyLattice& lattice) {
  json names = json::array();
  for (std::size_t i = 0; i < lattice.size(); ++i) names.push_back(lattice.antichain(i).to_string());
  return {{"n", lattice.n()}, {"count", lattice.size()}, {"antichains", std::move(names)}};
}

json pid_result_json(const PidResult& r, const std::string& input) {
  json out;
  out["n"] = r.n;
  out["total_mi_bits"] = r.total_mi;
  out["complexity"] = optional_number(r.complexity);
  out["complexity_out_of_range"] = r.complexity_out_of_range();
  out["multiplicity"] = optional_number(r.multiplicity);
  out["backbone"] = backbone_json(r.backbone);
  out["atoms"] = atoms_json(*r.lattice, r.atoms, r.redundancies);
  if (!r.per_label.empty()) {
    json labels = json::array();
    for (const auto& entry : r.per_label) {
      json atoms = json::array();
      for (std::size_t i = 0; i < entry.atoms.size(); ++i) {
        atoms.push_back({{"antichain", r.lattice->antichain(i).to_string()}, {"pi_bits", entry.atoms[i]}});
      }
      labels.push_back({{"label", entry.label},
                        {"probability", entry.probability},
                        {"information_bits", entry.information},
                        {"complexity", optional_number(entry.complexity)},
                        {"atoms", std::move(atoms)}});
    }
    out["per_label"] = {{"construction", "conditional expectation over p(s|t), inverted per label (extension)"},
                        {"labels", std::move(labels)}};
  }
  out["meta"] = {{"input", input}, {"tolerance", r.tolerance}, {"mode", to_string(r.mode)}};
  return out;
}

json reduction_json(const ReductionReport& r) {
  json out;
  out["mode"] = to_string(r.mode);
  out["reduced_complexity"] = r.reduced_complexity;
  out["selection"] = r.selection;
  if (r.order) out["order"] = *r.order;
  if (r.lower_bound) out["bounds"] = {{"lower", *r.lower_bound}, {"upper", *r.upper_bound}};
  if (r.full_complexity) out["full_complexity"] = *r.full_complexity;
  if (r.bounds_hold) out["bounds_hold"] = *r.bounds_hold;
  if (r.seed) out["seed"] = *r.seed;
  out["warning"] = r.warning ? json(*r.warning) : json(nullptr);
  return out;
}

json directed_differences_json(const DirectedDifferences& d, std::optional<double> reing) {
  return {{"differences", d.values}, {"c_reing", optional_number(reing)}, {"total_mi", d.total_mi}};
}

json comparison_json(const Comparison& c) {
  return {{"total_mi", c.total_mi},
          {"complexity", optional_number(c.complexity)},
          {"c_reing", optional_number(c.reing_complexity)},
          {"backbone", backbone_json(c.backbone)},
          {"differences", c.differences}};
}

json toy_json(const ToyResult& r) {
  json out{{"case", r.toy.name},
           {"construction", r.toy.construction},
           {"complexity", r.complexity},
           {"reference", r.toy.reference},
           {"tolerance", toy_tolerance},
           {"passed", r.passed},
           {"method", r.method}};
  if (r.coarse_order) {
    out["coarse_bounds"] = {{"order", *r.coarse_order}, {"lower", *r.coarse_lower}, {"upper", *r.coarse_upper}};
  }
  return out;
}

}  // namespace pidc
