#include "ttn/nonlinearity.hpp"

#include <algorithm>
#include <cmath>

namespace ttn {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::KellerSegel: return "keller_segel";
    case ModelKind::FisherKPP: return "fisher_kpp";
    case ModelKind::KuramotoSivashinsky: return "kse";
    case ModelKind::Linear: return "linear";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "keller_segel") return ModelKind::KellerSegel;
  if (name == "fisher_kpp") return ModelKind::FisherKPP;
  if (name == "kse" || name == "kuramoto_sivashinsky") return ModelKind::KuramotoSivashinsky;
  if (name == "linear") return ModelKind::Linear;
  throw ModelError("unknown model '" + name + "' (expected keller_segel, fisher_kpp, kse, linear)");
}

std::optional<double> model_alpha(ModelKind kind) {
  switch (kind) {
    case ModelKind::KellerSegel:
    case ModelKind::FisherKPP: return 1.0;
    case ModelKind::KuramotoSivashinsky: return 2.0;
    case ModelKind::Linear: return std::nullopt;
  }
  return std::nullopt;
}

ModelSpec ModelSpec::make(ModelKind kind, int dim, std::optional<double> alpha) {
  ModelSpec m;
  m.kind = kind;
  m.dim = dim;
  const auto fixed = model_alpha(kind);
  if (fixed && alpha && *alpha != *fixed) throw ModelError("alpha fixed by model");
  m.alpha = fixed ? *fixed : alpha.value_or(1.0);
  m.validate();
  return m;
}

void ModelSpec::validate() const {
  if (dim != 2 && dim != 3) throw ModelError("model dimension must be 2 or 3");
  if (!(alpha >= 1.0)) throw ModelError("alpha must be >= 1");
  const auto fixed = model_alpha(kind);
  if (fixed && alpha != *fixed) throw ModelError("alpha fixed by model");
  if (kind == ModelKind::KellerSegel && !(chi > 0.0)) throw ModelError("chi must be positive");
}

void CutoffSpec::validate() const {
  if (!(R > 0.0)) throw ModelError("cut-off radius R must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) throw ModelError("cut-off index delta must lie in (0, 1]");
}

double cutoff_ramp(double R, double x) {
  if (x <= R) return 1.0;
  if (x >= R + 1.0) return 0.0;
  return R + 1.0 - x;
}

double cutoff_value(const CutoffSpec& spec, const SpectralField& u) {
  return cutoff_ramp(spec.R, sobolev_norm(u, -spec.delta));
}

SpectralField keller_segel_quadratic(const SpectralField& u, double chi) {
  const SpectralField ig = inverse_gradient(u);
  SpectralField flux(u.dim(), u.cutoff(), u.dim());
  for (int j = 0; j < u.dim(); ++j) {
    SpectralField comp(u.dim(), u.cutoff(), 1);
    std::copy(ig.component(j).begin(), ig.component(j).end(), comp.component(0).begin());
    const SpectralField p = dealiased_product(u, comp);
    std::copy(p.component(0).begin(), p.component(0).end(), flux.component(j).begin());
  }
  SpectralField out = divergence(flux);
  out *= -chi;
  return out;
}

namespace {

void check_shape(const ModelSpec& model, const SpectralField& u) {
  if (u.components() != 1) throw ModelError("nonlinearity acts on scalar fields");
  if (u.dim() != model.dim) throw ModelError("model/field dimension mismatch");
}

}  // namespace

SpectralField evaluate_F(const ModelSpec& model, const SpectralField& u) {
  check_shape(model, u);
  switch (model.kind) {
    case ModelKind::Linear: return u.zeros_like();
    case ModelKind::FisherKPP: {
      SpectralField out = dealiased_product(u, u);
      out -= u;
      return out;
    }
    case ModelKind::KellerSegel: {
      if (std::abs(mean(u)) >= kZeroMeanTolerance) {
        throw ModelError("Keller-Segel state must have zero mean");
      }
      SpectralField out = keller_segel_quadratic(u, model.chi);
      out.add_scaled(u, model.chi * model.lambda);
      return out;
    }
    case ModelKind::KuramotoSivashinsky: {
      const SpectralField g = gradient(u);
      SpectralField out = apply_radial_multiplier(u, [](double k2) { return kFourPiSq * k2; });  // -Delta u
      out.add_scaled(dealiased_dot(g, g), -0.5);
      return out;
    }
  }
  throw ModelError("unhandled model kind");
}

double pairing_F_u(const ModelSpec& model, const SpectralField& u) {
  check_shape(model, u);
  if (model.kind == ModelKind::FisherKPP) return cubic_integral(u) - l2_norm_sq(u);
  return inner_product(evaluate_F(model, u), u);
}

// ---------------------------------------------------------------------------

HypothesisParams HypothesisParams::defaults(ModelKind kind) {
  HypothesisParams p;
  switch (kind) {
    case ModelKind::FisherKPP: p.eta = 0.5; break;
    case ModelKind::KellerSegel: p.eta = 0.25; break;
    case ModelKind::KuramotoSivashinsky:
      p.eta = 1.0;
      p.beta2 = 11.0 / 8.0;
      p.gamma2 = 13.0 / 8.0;
      p.beta3 = 5.0 / 4.0;
      p.gamma3 = 3.0 / 4.0;
      break;
    case ModelKind::Linear: break;
  }
  return p;
}

void HypothesisParams::validate() const {
  for (double v : {eta, beta1, beta2, gamma2, beta3, gamma3, kappa}) {
    if (!(v >= 0.0)) throw ModelError("hypothesis exponents must be nonnegative");
  }
  if (!(gamma2 < 2.0)) throw ModelError("gamma2 must be below 2");
  if (!(gamma3 < 2.0)) throw ModelError("gamma3 must be below 2");
  if (beta3 + gamma3 < 2.0) throw ModelError("beta3 + gamma3 must be at least 2");
  if (gamma3 + kappa > 2.0) throw ModelError("gamma3 + kappa must not exceed 2");
}

std::vector<ProbeRow> hypothesis_probe(const ModelSpec& model, const HypothesisParams& params,
                                       const std::vector<SpectralField>& ensemble,
                                       const std::string& ensemble_id) {
  if (ensemble.empty()) throw ModelError("hypothesis probe needs a nonempty ensemble");
  params.validate();
  const double a = model.alpha;
  double h1 = 0.0, h2 = 0.0, h3 = 0.0;
  std::vector<SpectralField> F;
  F.reserve(ensemble.size());
  for (const auto& u : ensemble) {
    F.push_back(evaluate_F(model, u));
    const double l2 = l2_norm(u);
    const double ha = sobolev_norm(u, a);
    h1 = std::max(h1, sobolev_norm(F.back(), -a) / ((1.0 + std::pow(l2, params.beta1)) * (1.0 + ha)));
    h2 = std::max(h2, std::abs(pairing_F_u(model, u)) /
                          ((1.0 + std::pow(l2, params.beta2)) * (1.0 + std::pow(ha, params.gamma2))));
  }
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    for (std::size_t j = i + 1; j < ensemble.size(); ++j) {
      const SpectralField w = ensemble[i] - ensemble[j];
      const double wl2 = l2_norm(w);
      if (wl2 == 0.0) continue;
      const double num = std::abs(inner_product(w, F[i] - F[j]));
      const double den = std::pow(wl2, params.beta3) * std::pow(sobolev_norm(w, a), params.gamma3) *
                         (1.0 + std::pow(sobolev_norm(ensemble[i], a), params.kappa) +
                          std::pow(sobolev_norm(ensemble[j], a), params.kappa));
      h3 = std::max(h3, num / den);
    }
  }
  return {{"H1", ensemble_id, h1}, {"H2", ensemble_id, h2}, {"H3", ensemble_id, h3}};
}

}  // namespace ttn
