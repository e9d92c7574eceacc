#include "gkm/error.hpp"
#include "gkm/sim.hpp"

namespace gkm {

namespace {

/// h with k^h == n, h >= 1; NotPredictable otherwise.
std::uint64_t
exact_log(std::uint64_t n, unsigned k)
{
  std::uint64_t h = 0;
  std::uint64_t span = 1;
  while (span < n) {
    span *= k;
    ++h;
  }
  if (span != n || h == 0) {
    throw Error(ErrorCode::NotPredictable,
                std::to_string(n) + " is not a positive power of " + std::to_string(k));
  }
  return h;
}

std::uint64_t
geometric(unsigned k, std::uint64_t h)
{
  // sum_{i=0..h} k^i
  std::uint64_t total = 0;
  std::uint64_t term = 1;
  for (std::uint64_t i = 0; i <= h; ++i) {
    total += term;
    term *= k;
  }
  return total;
}

} // namespace

std::uint64_t
hybrid_storage_sum(unsigned a, std::uint64_t clusters)
{
  return geometric(a, exact_log(clusters, a)) + clusters;
}

std::uint64_t
hybrid_storage_closed(unsigned a, std::uint64_t clusters)
{
  return ((2 * a - 1) * clusters - 1) / (a - 1);
}

FormulaCosts
predict_costs(const SchemeParams& params, std::uint64_t n)
{
  params.validate();
  const unsigned k = params.degree;
  FormulaCosts f;
  switch (params.scheme) {
    case SchemeId::Simple:
      if (n < 1) {
        break;
      }
      f.leave_messages = f.leave_payload = n - 1;
      f.join_messages = f.join_payload = n;
      f.controller_keys = n + 1;
      f.member_keys = 2;
      return f;
    case SchemeId::GKMP:
      if (n < 1) {
        break;
      }
      f.leave_messages = 1;
      f.leave_payload = 2;
      f.join_messages = 2;
      f.join_payload = 4;
      f.controller_keys = n + 2;
      f.member_keys = 3;
      return f;
    case SchemeId::LKH: {
      const auto h = exact_log(n, k);
      f.leave_messages = f.leave_payload = k * h - 1;
      f.join_messages = f.join_payload = 2 * h;
      f.controller_keys = geometric(k, h);
      f.member_keys = h + 1;
      return f;
    }
    case SchemeId::OFC:
    case SchemeId::IHC:
    case SchemeId::SDLKH: {
      const auto h = exact_log(n, k);
      f.leave_messages = f.leave_payload = (k - 1) * h;
      f.join_messages = f.join_payload = h + 1;
      f.controller_keys = geometric(k, h);
      f.member_keys = h + 1;
      return f;
    }
    case SchemeId::Hybrid: {
      const std::uint64_t m = params.cluster_size;
      if (n % m != 0) {
        throw Error(ErrorCode::NotPredictable, "group size is not a multiple of the cluster size");
      }
      const auto clusters = n / m;
      const auto h = exact_log(clusters, k);
      f.leave_messages = f.leave_payload = (m - 1) + (k - 1) * h;
      f.join_messages = f.join_payload = 2 + h;
      f.controller_keys = hybrid_storage_closed(k, clusters);
      f.member_keys = h + 2;
      return f;
    }
  }
  throw Error(ErrorCode::NotPredictable, "no formula for an empty group");
}

} // namespace gkm
