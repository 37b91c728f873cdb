#include "camseer/error.hpp"
#include "camseer/neuralnet.hpp"

namespace camseer::nn {

namespace {

constexpr std::string_view kMagic = "CNET";
constexpr std::uint32_t kVersion = 1;

// Visits every stored tensor in forward order. BN layers carry their running
// statistics next to gamma and beta.
template <typename Params, typename Fn>
void for_each_tensor(Params& params, Fn&& fn) {
  const auto& layout = params.layout;
  auto values = [&](std::size_t off, std::size_t n) {
    return std::span(params.values.data() + off, n);
  };
  auto bn = [&](std::size_t stage) {
    if (auto k = layout.bn_at(stage)) {
      const auto& s = layout.bn[*k];
      fn(values(s.gamma, s.width));
      fn(values(s.beta, s.width));
      fn(std::span(params.running[*k].mean.data(), s.width));
      fn(std::span(params.running[*k].var.data(), s.width));
    }
  };
  bn(0);
  for (std::size_t k = 0; k < layout.lstm.size(); ++k) {
    const auto& s = layout.lstm[k];
    fn(values(s.w, 4 * s.hidden * s.input));
    fn(values(s.u, 4 * s.hidden * s.hidden));
    fn(values(s.b, 4 * s.hidden));
    bn(k + 1);
  }
  fn(values(layout.dense_w, layout.dense_b - layout.dense_w));
  fn(values(layout.dense_b, 1));
}

}  // namespace

std::vector<std::uint8_t> save_model(const NetworkParams& params, const std::string& norm_reference) {
  require(params.values.size() == params.layout.total && params.running.size() == params.layout.bn.size(),
          ErrorKind::ContractViolation, "parameters do not match their layout");
  io::ByteWriter w;
  w.raw(kMagic);
  w.u32(kVersion);
  const std::string cfg = params.config.to_json().dump();
  w.u64(cfg.size());
  w.raw(cfg);
  w.u64(params.layout.total);
  for_each_tensor(params, [&](std::span<const double> t) { w.f64s(t); });
  w.u64(norm_reference.size());
  w.raw(norm_reference);
  return w.bytes();
}

LoadedModel load_model(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  if (r.remaining() < kMagic.size() || r.raw(kMagic.size()) != kMagic)
    fail(ErrorKind::Format, "not a model file (bad magic)");
  const auto version = r.u32();
  if (version != kVersion) fail(ErrorKind::Format, "unsupported model file version " + std::to_string(version));

  const auto cfg_len = r.u64();
  if (cfg_len > r.remaining()) fail(ErrorKind::Format, "truncated model configuration");
  io::json cfg_json;
  try {
    cfg_json = io::json::parse(r.raw(cfg_len));
  } catch (const io::json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed model configuration: ") + e.what());
  }

  LoadedModel out;
  auto& p = out.params;
  try {
    p.config = NetworkConfig::from_json(cfg_json);
    p.layout = ParamLayout::build(p.config);
  } catch (const Error& e) {
    fail(ErrorKind::Format, std::string("invalid model configuration: ") + e.what());
  }
  const auto total = r.u64();
  if (total != p.layout.total)
    fail(ErrorKind::Format, "parameter count " + std::to_string(total) + " does not match the configuration (" +
                                std::to_string(p.layout.total) + ")");
  p.values.assign(p.layout.total, 0.0);
  p.running.resize(p.layout.bn.size());
  for (std::size_t k = 0; k < p.layout.bn.size(); ++k) {
    p.running[k].mean.assign(p.layout.bn[k].width, 0.0);
    p.running[k].var.assign(p.layout.bn[k].width, 1.0);
  }
  for_each_tensor(p, [&](std::span<double> t) { r.f64s(t); });

  const auto ref_len = r.u64();
  if (ref_len > r.remaining()) fail(ErrorKind::Format, "truncated normalization reference");
  out.norm_reference = r.raw(ref_len);
  if (r.remaining() != 0) fail(ErrorKind::Format, "trailing bytes after model payload");
  return out;
}

}  // namespace camseer::nn
