#include "gkm/concrete.hpp"
#include "gkm/error.hpp"
#include "gkm/sim.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace gkm {

std::string
to_string(BatchAlgorithm a)
{
  switch (a) {
    case BatchAlgorithm::LamGouda:
      return "lam-gouda";
    case BatchAlgorithm::Balanced:
      return "balanced";
    case BatchAlgorithm::LamGoudaImproved:
      return "lam-gouda-improved";
    case BatchAlgorithm::BalancedImproved:
      return "balanced-improved";
  }
  return "?";
}

BatchAlgorithm
parse_batch_algorithm(const std::string& name)
{
  for (auto a : { BatchAlgorithm::LamGouda,
                  BatchAlgorithm::Balanced,
                  BatchAlgorithm::LamGoudaImproved,
                  BatchAlgorithm::BalancedImproved }) {
    if (to_string(a) == name) {
      return a;
    }
  }
  throw Error(ErrorCode::InvalidScenario, "unknown batch algorithm '" + name + "'");
}

bool
ScenarioConfig::operator==(const ScenarioConfig& o) const
{
  return params.scheme == o.params.scheme && params.degree == o.params.degree &&
         params.cluster_size == o.params.cluster_size && initial_size == o.initial_size && events == o.events &&
         batch_interval == o.batch_interval && batch_algorithm == o.batch_algorithm && seed == o.seed &&
         key_length_bits == o.key_length_bits && crypto_mode == o.crypto_mode;
}

bool
CostReport::operator==(const CostReport& o) const
{
  return params.scheme == o.params.scheme && params.degree == o.params.degree &&
         params.cluster_size == o.params.cluster_size && key_length_bits == o.key_length_bits &&
         events == o.events && total == o.total;
}

void
ScenarioConfig::validate() const
{
  try {
    params.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidScenario, e.what());
  }
  if (initial_size < 1) {
    throw Error(ErrorCode::InvalidScenario, "initial_size must be at least 1");
  }
  if (key_length_bits == 0 || key_length_bits % 8 != 0) {
    throw Error(ErrorCode::InvalidScenario, "key_length_bits must be a positive multiple of 8");
  }
  if (batch_interval && *batch_interval == 0) {
    throw Error(ErrorCode::InvalidScenario, "batch_interval must be positive");
  }
  if (batch_interval && params.scheme != SchemeId::LKH) {
    throw Error(ErrorCode::InvalidScenario, "batch rekeying is defined over LKH trees only");
  }
  std::set<MemberId> present;
  for (std::uint32_t i = 1; i <= initial_size; ++i) {
    present.insert(MemberId{ i });
  }
  std::uint64_t last_tick = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const auto where = "event " + std::to_string(i) + " (" + to_string(e.member) + "): ";
    if (e.tick < last_tick) {
      throw Error(ErrorCode::InvalidScenario, where + "ticks must not decrease");
    }
    last_tick = e.tick;
    if (e.kind == EventKind::Join && !present.insert(e.member).second) {
      throw Error(ErrorCode::InvalidScenario, where + "joins while already a member");
    }
    if (e.kind == EventKind::Leave && present.erase(e.member) == 0) {
      throw Error(ErrorCode::InvalidScenario, where + "leaves while not a member");
    }
  }
}

std::vector<MembershipEvent>
random_events(std::uint32_t initial_size, std::uint32_t max_size, std::size_t count, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::vector<MemberId> present;
  std::vector<MemberId> absent;
  for (std::uint32_t i = 1; i <= initial_size; ++i) {
    present.push_back(MemberId{ i });
  }
  std::uint32_t next_id = initial_size + 1;
  std::vector<MembershipEvent> out;
  for (std::size_t t = 0; t < count; ++t) {
    bool join = std::bernoulli_distribution(0.5)(rng);
    if (present.size() <= 1) {
      join = true;
    } else if (present.size() >= max_size) {
      join = false;
    }
    if (join) {
      MemberId m;
      // Former members come back about a third of the time.
      if (!absent.empty() && std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
        const auto i = std::uniform_int_distribution<std::size_t>(0, absent.size() - 1)(rng);
        m = absent[i];
        absent.erase(absent.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        m = MemberId{ next_id++ };
      }
      present.push_back(m);
      out.push_back({ t, EventKind::Join, m });
    } else {
      const auto i = std::uniform_int_distribution<std::size_t>(0, present.size() - 1)(rng);
      const auto m = present[i];
      present.erase(present.begin() + static_cast<std::ptrdiff_t>(i));
      absent.push_back(m);
      out.push_back({ t, EventKind::Leave, m });
    }
  }
  return out;
}

namespace {

std::vector<KeyTerm>
key_values(const MemberState& ms)
{
  std::vector<KeyTerm> out;
  for (const auto& [_, k] : ms.known) {
    out.push_back(k);
  }
  return out;
}

bool
flat_scheme(SchemeId s)
{
  return s == SchemeId::Simple || s == SchemeId::GKMP;
}

class Runner
{
public:
  explicit Runner(const ScenarioConfig& cfg)
    : cfg_(cfg)
  {
    std::vector<MemberId> initial;
    for (std::uint32_t i = 1; i <= cfg.initial_size; ++i) {
      initial.push_back(MemberId{ i });
    }
    auto init = init_group(cfg.params, initial);
    state_ = std::move(init.state);
    members_ = std::move(init.members);
    verify();
    if (cfg.crypto_mode == CryptoMode::Concrete) {
      concrete_.emplace(cfg.seed, cfg.key_length_bits);
    }
    result_.cost.params = cfg.params;
    result_.cost.key_length_bits = cfg.key_length_bits;
    result_.trace.initial_group_key = state_.group_key();
  }

  ScenarioResult run()
  {
    if (cfg_.batch_interval) {
      run_batches();
    } else {
      for (const auto& e : cfg_.events) {
        single(e);
      }
    }
    result_.trace.final_state = state_;
    result_.audit = audit_secrecy(result_.trace);
    return std::move(result_);
  }

private:
  void single(const MembershipEvent& e)
  {
    const bool leave = e.kind == EventKind::Leave;
    const std::uint64_t before_size = state_.tree.member_count();
    const bool full_before = state_.tree.is_full_balanced();
    auto plan = leave ? plan_leave(state_, e.member) : plan_join(state_, e.member);

    TraceEvent te;
    te.tick = e.tick;
    (leave ? te.leaves : te.joins).push_back(e.member);
    auto cost = apply(plan, te, (leave ? "leave " : "join ") + to_string(e.member));

    const bool flat = flat_scheme(cfg_.params.scheme);
    if (leave && (flat || full_before)) {
      set_message_prediction(cost, before_size, true);
    }
    if (!leave && (flat || state_.tree.is_full_balanced())) {
      set_message_prediction(cost, state_.tree.member_count(), false);
    }
    if (flat || state_.tree.is_full_balanced()) {
      try {
        const auto f = predict_costs(cfg_.params, state_.tree.member_count());
        cost.predicted.controller_keys_stored = f.controller_keys;
        cost.predicted.max_member_keys_stored = f.member_keys;
      } catch (const Error&) {
      }
    }
    finish(std::move(te), std::move(cost));
  }

  void set_message_prediction(EventCost& cost, std::uint64_t n, bool leave)
  {
    try {
      const auto f = predict_costs(cfg_.params, n);
      cost.predicted.messages = leave ? f.leave_messages : f.join_messages;
      cost.predicted.payload_keys = leave ? f.leave_payload : f.join_payload;
      cost.predicted.bytes = *cost.predicted.payload_keys * (cfg_.key_length_bits / 8);
    } catch (const Error&) {
    }
  }

  void run_batches()
  {
    // Windows close at multiples of the interval; empty windows are skipped.
    std::map<std::uint64_t, std::vector<MembershipEvent>> windows;
    for (const auto& e : cfg_.events) {
      windows[e.tick / *cfg_.batch_interval].push_back(e);
    }
    for (const auto& [idx, events] : windows) {
      const auto req = collect(events, idx);
      if (req.empty()) {
        continue;
      }
      RekeyPlan plan;
      switch (cfg_.batch_algorithm) {
        case BatchAlgorithm::LamGouda:
          plan = lam_gouda_rekey(state_, req);
          break;
        case BatchAlgorithm::Balanced:
          plan = balanced_batch_rekey(state_, req).first;
          break;
        case BatchAlgorithm::LamGoudaImproved:
          plan = updating_factor_plan(state_, req, FactorVariant::LamGoudaImproved);
          break;
        case BatchAlgorithm::BalancedImproved:
          plan = updating_factor_plan(state_, req, FactorVariant::BalancedImproved);
          break;
      }
      TraceEvent te;
      te.tick = (idx + 1) * *cfg_.batch_interval;
      te.batch = true;
      te.joins = req.joins;
      te.leaves = req.leaves;
      auto cost = apply(plan,
                        te,
                        "batch " + std::to_string(idx) + " (+" + std::to_string(req.joins.size()) + " -" +
                          std::to_string(req.leaves.size()) + ")");
      finish(std::move(te), std::move(cost));
    }
  }

  EventCost apply(const RekeyPlan& plan, TraceEvent& te, std::string label)
  {
    te.index = result_.trace.events.size() + 1;
    for (auto m : plan.departed) {
      auto it = members_.find(m);
      if (it == members_.end()) {
        throw Error(ErrorCode::InternalInconsistency, to_string(m) + " departed without member state");
      }
      te.departed_keys.emplace(m, key_values(it->second));
      members_.erase(it);
    }
    for (auto& [m, ms] : members_) {
      ms = apply_plan_member(ms, plan);
    }
    for (const auto& r : plan.registrations) {
      members_.insert_or_assign(r.member, admit_member(plan, r.member));
    }
    state_ = plan.next;
    verify();
    for (const auto& r : plan.registrations) {
      te.joined_keys.emplace(r.member, key_values(members_.at(r.member)));
    }
    te.messages = plan.messages;
    te.dirtied = plan.dirtied_nodes;
    te.renames = plan.renames;
    te.group_key = plan.new_group_key;
    if (concrete_ && te.group_key) {
      std::ostringstream hex;
      const auto& b = concrete_->bytes(*te.group_key);
      for (std::size_t i = 0; i < std::min<std::size_t>(8, b.size()); ++i) {
        static const char* digits = "0123456789abcdef";
        hex << digits[b[i] >> 4] << digits[b[i] & 15];
      }
      te.group_key_fingerprint = hex.str();
    }

    EventCost cost;
    cost.index = te.index;
    cost.label = std::move(label);
    cost.measured.unicast_count = plan.unicast_count();
    cost.measured.multicast_count = plan.multicast_count();
    cost.measured.payload_keys = plan.payload_keys();
    cost.measured.bytes = cost.measured.payload_keys * (cfg_.key_length_bits / 8);
    cost.measured.controller_keys_stored = state_.controller_keys_stored();
    cost.measured.max_member_keys_stored = state_.max_member_keys_stored();
    return cost;
  }

  void finish(TraceEvent te, EventCost cost)
  {
    auto& total = result_.cost.total;
    total.unicast_count += cost.measured.unicast_count;
    total.multicast_count += cost.measured.multicast_count;
    total.payload_keys += cost.measured.payload_keys;
    total.bytes += cost.measured.bytes;
    total.controller_keys_stored = std::max(total.controller_keys_stored, cost.measured.controller_keys_stored);
    total.max_member_keys_stored = std::max(total.max_member_keys_stored, cost.measured.max_member_keys_stored);
    result_.cost.events.push_back(std::move(cost));
    result_.trace.events.push_back(std::move(te));
  }

  /// Every member holds exactly the keys the controller assigns it.
  void verify() const
  {
    if (members_.size() != state_.tree.member_count()) {
      throw Error(ErrorCode::InternalInconsistency, "member states and tree placement disagree");
    }
    for (const auto& [m, ms] : members_) {
      if (!state_.tree.contains(m)) {
        throw Error(ErrorCode::InternalInconsistency, to_string(m) + " has state but no leaf");
      }
      if (ms.known != state_.slots_of(m) || ms.leaf != state_.tree.leaf_of(m)) {
        throw Error(ErrorCode::InternalInconsistency,
                    to_string(m) + " does not hold exactly its path keys after event " +
                      std::to_string(state_.event_counter));
      }
    }
  }

  const ScenarioConfig& cfg_;
  GroupState state_;
  std::map<MemberId, MemberState> members_;
  std::optional<ConcreteKeys> concrete_;
  ScenarioResult result_;
};

} // namespace

ScenarioResult
run_scenario(const ScenarioConfig& cfg)
{
  cfg.validate();
  return Runner(cfg).run();
}

} // namespace gkm
