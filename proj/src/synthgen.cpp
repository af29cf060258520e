#include "synthgen.hpp"

#include <cmath>
#include <numbers>

#include "error.hpp"
#include "parallel.hpp"

namespace tsxai {

SynthKind parse_kind(const std::string& name) {
  if (name == "pp" || name == "pseudo-periodic" || name == "pseudoperiodic")
    return SynthKind::PseudoPeriodic;
  if (name == "gaussian" || name == "gauss") return SynthKind::Gaussian;
  if (name == "ar" || name == "autoregressive") return SynthKind::AutoRegressive;
  throw DomainError("unknown synthetic kind '" + name + "' (want pp, gaussian, or ar)");
}

std::string kind_name(SynthKind kind) {
  switch (kind) {
    case SynthKind::PseudoPeriodic: return "pp";
    case SynthKind::Gaussian: return "gaussian";
    case SynthKind::AutoRegressive: return "ar";
  }
  throw DomainError("unknown synthetic kind");
}

void SynthSpec::validate() const {
  if (d < 1 || L < 1) throw DomainError("synthetic spec needs d >= 1 and L >= 1");
  if (n_train < 2 || n_test < 2)
    throw DomainError("each split needs at least 2 instances (one per class)");
  if (box_ch_lo < 0 || box_ch_hi <= box_ch_lo || box_ch_hi > d)
    throw MisalignedBox("box channel range [" + std::to_string(box_ch_lo) + "," +
                        std::to_string(box_ch_hi) + ") not inside [0," + std::to_string(d) + ")");
  if (box_t_lo < 0 || box_t_hi <= box_t_lo || box_t_hi > L)
    throw MisalignedBox("box time range [" + std::to_string(box_t_lo) + "," +
                        std::to_string(box_t_hi) + ") not inside [0," + std::to_string(L) + ")");
  if (!std::isfinite(offset)) throw DomainError("box offset must be finite");
  if (!(std::abs(ar_phi) < 1.0)) throw DomainError("AR coefficient must satisfy |phi| < 1");
}

MultiSeries generate_base(const SynthSpec& spec, Rng& rng) {
  Matrix values(spec.d, spec.L);
  for (int c = 0; c < spec.d; ++c) {
    switch (spec.kind) {
      case SynthKind::PseudoPeriodic: {
        double freq = rng.uniform(2.0, 6.0);
        double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (int t = 0; t < spec.L; ++t)
          values(c, t) =
              std::sin(2.0 * std::numbers::pi * freq * t / spec.L + phase) + 0.1 * rng.normal();
        break;
      }
      case SynthKind::Gaussian:
        for (int t = 0; t < spec.L; ++t) values(c, t) = rng.normal();
        break;
      case SynthKind::AutoRegressive: {
        double prev = 0.0;
        for (int t = 0; t < spec.L; ++t) {
          prev = spec.ar_phi * prev + rng.normal();
          values(c, t) = prev;
        }
        break;
      }
    }
  }
  return MultiSeries(std::move(values));
}

MultiSeries inject_box(const MultiSeries& base, const SynthSpec& spec, int label) {
  if (label != 0 && label != 1) throw DomainError("label must be 0 or 1");
  if (base.channels() != spec.d || base.length() != spec.L)
    throw ShapeMismatch("base series shape does not match spec");
  double delta = label == 1 ? spec.offset : -spec.offset;
  Matrix values = base.values();
  for (int c = spec.box_ch_lo; c < spec.box_ch_hi; ++c)
    for (int t = spec.box_t_lo; t < spec.box_t_hi; ++t) values(c, t) += delta;
  return MultiSeries(std::move(values));
}

GroundTruthMask ground_truth_mask(const SynthSpec& spec, int segments_per_channel) {
  spec.validate();
  if (segments_per_channel < 1) throw MisalignedBox("need at least one segment per channel");
  if (spec.L % segments_per_channel != 0)
    throw MisalignedBox("length " + std::to_string(spec.L) + " not divisible into " +
                        std::to_string(segments_per_channel) + " segments");
  int width = spec.L / segments_per_channel;
  if (spec.box_t_lo % width != 0 || spec.box_t_hi % width != 0)
    throw MisalignedBox("box time range [" + std::to_string(spec.box_t_lo) + "," +
                        std::to_string(spec.box_t_hi) + ") straddles segments of width " +
                        std::to_string(width));
  Matrix mask(spec.d, segments_per_channel);
  for (int c = spec.box_ch_lo; c < spec.box_ch_hi; ++c)
    for (int s = spec.box_t_lo / width; s < spec.box_t_hi / width; ++s) mask(c, s) = 1.0;
  return GroundTruthMask(std::move(mask));
}

namespace {

LabeledDataset generate_split(const SynthSpec& spec, int split, int n, const std::string& name) {
  std::vector<MultiSeries> instances(static_cast<size_t>(n));
  std::vector<int> labels(static_cast<size_t>(n));
  parallel_for(n, [&](int64_t i) {
    Rng rng(derive_seed(spec.seed, {static_cast<uint64_t>(split), static_cast<uint64_t>(i)}));
    int label = static_cast<int>(i % 2);
    labels[static_cast<size_t>(i)] = label;
    instances[static_cast<size_t>(i)] = inject_box(generate_base(spec, rng), spec, label);
  });
  return LabeledDataset(std::move(instances), std::move(labels), 2, spec.seed, name);
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> generate_dataset(const SynthSpec& spec) {
  spec.validate();
  std::string base = kind_name(spec.kind);
  return {generate_split(spec, 0, spec.n_train, base + "-train"),
          generate_split(spec, 1, spec.n_test, base + "-test")};
}

}  // namespace tsxai
