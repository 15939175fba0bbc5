#pragma once

// Model -> criticality -> essential spectrum -> factor type.

#include <optional>
#include <vector>

#include "embz/essspec.hpp"
#include "embz/spectral.hpp"
#include "embz/toeplitz.hpp"

namespace embz {

struct PipelineOptions {
  SpectralTolerances spectral;
  int hs_terms = 4096;
  std::vector<int> decay_sizes{128, 256, 512, 1024};
  int section_grid = 8192;
};

struct ClassificationReport {
  ProjectorSymbol symbol;
  EssentialSpectrumSet essential;
  HsVerdict hs;
  std::optional<SectionDecayEvidence> decay;  // only when no interval was found
  FactorVerdict verdict;

  bool critical() const { return !symbol.discontinuities().empty(); }
};

inline ClassificationReport classify_model(const HoppingModel& model, const PipelineOptions& opt = {}) {
  auto psym = ground_state_symbol(build_symbol(model), KernelPolicy::Empty, opt.spectral);
  auto ess = essential_spectrum(psym);
  auto hs = hs_divergence_verdict(hs_offdiagonal_partial_sums(psym, opt.hs_terms, opt.section_grid));
  std::optional<SectionDecayEvidence> decay;
  if (!ess.has_interval()) decay = section_decay_evidence(psym, opt.decay_sizes, opt.section_grid);
  auto verdict = classify_factor_type(ess, hs, decay);
  return {std::move(psym), std::move(ess), std::move(hs), std::move(decay), std::move(verdict)};
}

}  // namespace embz
