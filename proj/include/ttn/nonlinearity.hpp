#pragma once

// Drift nonlinearities F, the H^{-delta} cut-off g_R, and ratio probes of the
// growth and continuity bounds.

#include <optional>
#include <string>
#include <vector>

#include "ttn/spectral.hpp"

namespace ttn {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelKind {
  KellerSegel,          // F(u) = -chi div(u grad^{-1} u) + chi lambda u, u zero-mean
  FisherKPP,            // F(u) = u^2 - u
  KuramotoSivashinsky,  // F(u) = -Delta u - |grad u|^2 / 2
  Linear,               // F = 0, alpha free (heat/transport test model)
};

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);
/// Dissipation exponent fixed by each model; nullopt for Linear.
std::optional<double> model_alpha(ModelKind kind);

struct ModelSpec {
  ModelKind kind = ModelKind::Linear;
  double alpha = 1.0;
  int dim = 2;
  double lambda = 0.0;  // Keller-Segel mean density
  double chi = 1.0;     // Keller-Segel sensitivity

  static ModelSpec make(ModelKind kind, int dim, std::optional<double> alpha = std::nullopt);
  void validate() const;
};

struct CutoffSpec {
  double R = 1.0;
  double delta = 0.1;
  void validate() const;
};

/// Piecewise-linear ramp: 1 on [0,R], R+1-x on (R,R+1), 0 beyond.
double cutoff_ramp(double R, double x);
/// g_R(||u||_{H^{-delta}}).
double cutoff_value(const CutoffSpec& spec, const SpectralField& u);

/// Mean magnitude above which a Keller-Segel state is rejected.
inline constexpr double kZeroMeanTolerance = 1e-10;

SpectralField evaluate_F(const ModelSpec& model, const SpectralField& u);
/// <F(u), u>_{L^2}.
double pairing_F_u(const ModelSpec& model, const SpectralField& u);

/// -chi div(u grad^{-1} u), the quadratic Keller-Segel term.
SpectralField keller_segel_quadratic(const SpectralField& u, double chi = 1.0);

struct HypothesisParams {
  double eta = 0.5;
  double beta1 = 1.0;
  double beta2 = 1.5;
  double gamma2 = 1.5;
  double beta3 = 1.0;
  double gamma3 = 1.0;
  double kappa = 1.0;

  static HypothesisParams defaults(ModelKind kind);
  void validate() const;
};

struct ProbeRow {
  std::string hypothesis;  // "H1", "H2", "H3"
  std::string ensemble_id;
  double max_ratio = 0.0;
};

/// Max over the ensemble (and over ordered distinct pairs for H3) of
///   H1: ||F(u)||_{H^-a} / ((1+||u||^b1)(1+||u||_{H^a}))
///   H2: |<F(u),u>| / ((1+||u||^b2)(1+||u||_{H^a}^g2))
///   H3: |<u-v,F(u)-F(v)>| / (||u-v||^b3 ||u-v||_{H^a}^g3 (1+||u||_{H^a}^k+||v||_{H^a}^k))
std::vector<ProbeRow> hypothesis_probe(const ModelSpec& model, const HypothesisParams& params,
                                       const std::vector<SpectralField>& ensemble,
                                       const std::string& ensemble_id = "0");

}  // namespace ttn
