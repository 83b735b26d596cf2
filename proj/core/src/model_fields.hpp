#pragma once

#include "helm/ship.hpp"
#include "json_fields.hpp"

namespace helm::detail {

#define HELM_PRINCIPAL_FIELDS(X) \
  X(length_m) X(beam_m) X(draft_m) X(displacement_m3) X(x_g_m) X(design_speed_mps) X(rho_water)

#define HELM_MMG_FIELDS(X)                                                                          \
  X(m) X(m_x) X(m_y) X(j_z) X(i_zz) X(r_0) X(x_vv) X(x_vr) X(x_rr) X(x_vvvv) X(y_v) X(y_r) X(y_vvv) \
  X(y_vvr) X(y_vrr) X(y_rrr) X(n_v) X(n_r) X(n_vvv) X(n_vvr) X(n_vrr) X(n_rrr) X(d_p) X(t_p)       \
  X(w_p0) X(x_p) X(k_0) X(k_1) X(k_2) X(j_max) X(a_r) X(aspect_ratio) X(f_alpha) X(epsilon)        \
  X(kappa) X(t_r) X(a_h) X(x_h) X(x_r) X(gamma_r) X(l_r)

#define HELM_ACTUATOR_FIELDS(X) X(delta_max_rad) X(delta_rate_max_radps) X(propeller_rps)

// Reads the ship-related sections present in doc ("principal"/"mmg"/
// "actuator" in a model file, "ship"/"mmg"/"actuator" in a run config).
inline void read_principal(const json& j, const std::string& name, ShipPrincipalParams& p) {
  FieldReader r(j, name);
#define X(f) r.read(#f, p.f);
  HELM_PRINCIPAL_FIELDS(X)
#undef X
  r.finish();
}

inline void read_mmg(const json& j, const std::string& name, MmgCoefficients& c) {
  FieldReader r(j, name);
#define X(f) r.read(#f, c.f);
  HELM_MMG_FIELDS(X)
#undef X
  r.finish();
}

inline void read_actuator(const json& j, const std::string& name, ActuatorParams& a) {
  FieldReader r(j, name);
#define X(f) r.read(#f, a.f);
  HELM_ACTUATOR_FIELDS(X)
#undef X
  r.finish();
}

inline void read_ship_sections(const json& doc, const std::string& principal_key, ShipModel& model) {
  const std::string key = principal_key.empty() ? "principal" : principal_key;
  FieldReader top(doc, "");
  if (const json* p = top.child(key.c_str())) read_principal(*p, key, model.principal);
  if (const json* m = top.child("mmg")) read_mmg(*m, "mmg", model.mmg);
  if (const json* a = top.child("actuator")) read_actuator(*a, "actuator", model.actuator);
  top.finish();
}

inline void write_ship_sections(json& doc, const ShipModel& model) {
#define X(f) doc["principal"][#f] = model.principal.f;
  HELM_PRINCIPAL_FIELDS(X)
#undef X
#define X(f) doc["mmg"][#f] = model.mmg.f;
  HELM_MMG_FIELDS(X)
#undef X
#define X(f) doc["actuator"][#f] = model.actuator.f;
  HELM_ACTUATOR_FIELDS(X)
#undef X
}

}  // namespace helm::detail
