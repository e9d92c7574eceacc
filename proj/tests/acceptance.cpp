// Acceptance run: one PASS/FAIL line per criterion. Every expected value is
// either quoted from the protocol descriptions or recomputed here without
// the library's own formulas.

#include "gkm/batch.hpp"
#include "gkm/cli.hpp"
#include "gkm/error.hpp"
#include "gkm/scheme.hpp"
#include "gkm/sim.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace gkm;
namespace fs = std::filesystem;

namespace {

/// Thrown by `require` with the reason a criterion failed.
struct Miss
{
  std::string why;
};

void
require(bool ok, const std::string& why)
{
  if (!ok) {
    throw Miss{ why };
  }
}

MemberId
M(std::uint32_t v)
{
  return MemberId{ v };
}

std::uint64_t
ipow(std::uint64_t b, unsigned e)
{
  std::uint64_t r = 1;
  while (e-- > 0) {
    r *= b;
  }
  return r;
}

/// K_{level,index} found by counting nodes level by level.
NodeId
at_label(unsigned level, std::uint64_t index, unsigned k)
{
  std::uint64_t first = 0;
  std::uint64_t width = 1;
  for (unsigned l = 0; l < level; ++l) {
    first += width;
    width *= k;
  }
  return NodeId{ first + index - 1 };
}

struct Group
{
  GroupState state;
  std::map<MemberId, MemberState> members;
};

Group
make(SchemeId s, unsigned k, std::uint32_t n, unsigned m = 1)
{
  std::vector<MemberId> ids;
  for (std::uint32_t i = 1; i <= n; ++i) {
    ids.push_back(M(i));
  }
  auto init = init_group({ s, k, m }, ids);
  return { std::move(init.state), std::move(init.members) };
}

/// Applies `plan` member-side and checks everyone holds exactly its path.
void
apply(Group& g, const RekeyPlan& plan)
{
  for (auto m : plan.departed) {
    g.members.erase(m);
  }
  for (auto& [m, ms] : g.members) {
    ms = apply_plan_member(ms, plan);
  }
  for (const auto& r : plan.registrations) {
    g.members.insert_or_assign(r.member, admit_member(plan, r.member));
  }
  g.state = plan.next;
  require(g.members.size() == g.state.tree.member_count(), "member count drifted");
  for (const auto& [m, ms] : g.members) {
    require(ms.known == g.state.slots_of(m), to_string(m) + " does not hold exactly its path keys");
  }
}

std::string
key_at(const GroupState& s, unsigned level, std::uint64_t index)
{
  return s.tree.key(at_label(level, index, s.tree.degree())).repr();
}

using Pairs = std::vector<std::pair<std::string, std::string>>;

Pairs
pairs(const RekeyPlan& p)
{
  Pairs out;
  for (const auto& m : p.messages) {
    for (const auto& t : m.ciphertext.payload) {
      out.emplace_back(t.repr(), m.ciphertext.enc_key.repr());
    }
  }
  return out;
}

/// Members of `s` whose leaf lies under `node`.
std::set<MemberId>
covered(const GroupState& s, NodeId node)
{
  std::set<MemberId> out;
  for (const auto& [m, leaf] : s.tree.placement()) {
    NodeId n = leaf;
    while (true) {
      if (n == node) {
        out.insert(m);
        break;
      }
      if (n.is_root()) {
        break;
      }
      n = NodeId{ (n.value - 1) / s.tree.degree() };
    }
  }
  return out;
}

void
note(std::ostream& log, const RekeyPlan& p)
{
  for (const auto& [a, b] : pairs(p)) {
    log << a << "|" << b << ";";
  }
  log << "\n";
}

// 1. LKH leave on the eight-member binary tree.
void
lkh_leave(std::ostream& log)
{
  auto g = make(SchemeId::LKH, 2, 8);
  const auto old = g.state;
  const auto plan = plan_leave(g.state, M(1));
  const auto& nw = plan.next;
  const Pairs expected{ { key_at(nw, 2, 1), key_at(old, 3, 2) }, { key_at(nw, 1, 1), key_at(nw, 2, 1) },
                        { key_at(nw, 1, 1), key_at(old, 2, 2) }, { key_at(nw, 0, 1), key_at(nw, 1, 1) },
                        { key_at(nw, 0, 1), key_at(old, 1, 2) } };
  require(plan.messages.size() == 5, "expected 5 messages, got " + std::to_string(plan.messages.size()));
  require(pairs(plan) == expected, "payload/encryption pairs differ");
  // Whoever holds the encryption key after the leave, except the leaver.
  const std::vector<NodeId> enc_nodes{ at_label(3, 2, 2), at_label(2, 1, 2), at_label(2, 2, 2), at_label(1, 1, 2),
                                       at_label(1, 2, 2) };
  for (std::size_t i = 0; i < 5; ++i) {
    require(plan.messages[i].recipients == covered(nw, enc_nodes[i]), "recipients of message " + std::to_string(i));
  }
  apply(g, plan);
  note(log, plan);
}

// 2. The same member joins back.
void
lkh_rejoin(std::ostream& log)
{
  auto g = make(SchemeId::LKH, 2, 8);
  apply(g, plan_leave(g.state, M(1)));
  const auto old_root = key_at(g.state, 0, 1);
  const auto plan = plan_join(g.state, M(1));
  require(plan.messages.size() == 6, "expected 6 messages, got " + std::to_string(plan.messages.size()));
  const auto& last = plan.messages.back().ciphertext;
  require(last.enc_key.repr() == old_root, "last message not under the old group key");
  require(last.payload.front().repr() == key_at(plan.next, 0, 1), "last message does not carry the new group key");
  apply(g, plan);
  note(log, plan);
}

// 3. OFC leave: r and its right halves, members rebuild their path.
void
ofc_leave(std::ostream& log)
{
  auto g = make(SchemeId::OFC, 2, 8);
  const auto plan = plan_leave(g.state, M(1));
  require(plan.messages.size() == 3, "expected 3 messages");
  const auto r = plan.messages[0].ciphertext.payload.front();
  require(r.kind() == TermKind::Fresh, "first payload is not a fresh r");
  require(plan.messages[1].ciphertext.payload.front() == KeyTerm::g_right(r), "second payload is not R(r)");
  require(plan.messages[2].ciphertext.payload.front() == KeyTerm::g_right(KeyTerm::g_right(r)),
          "third payload is not R(R(r))");
  // Each survivor's new keys come from its received seed by repeated R.
  for (const auto& [m, ms] : g.members) {
    if (m == M(1)) {
      continue;
    }
    const auto after = apply_plan_member(ms, plan);
    for (auto node : plan.dirtied_nodes) {
      if (!after.known.contains(node)) {
        continue;
      }
      // Depth below the root decides how many R steps follow from r.
      unsigned depth = 0;
      for (NodeId n = node; !n.is_root(); n = NodeId{ (n.value - 1) / 2 }) {
        ++depth;
      }
      KeyTerm expect = r;
      for (unsigned i = depth; i < 2; ++i) {
        expect = KeyTerm::g_right(expect);
      }
      require(after.known.at(node) == expect, to_string(m) + " rebuilt the wrong key");
    }
  }
  apply(g, plan);
  note(log, plan);
}

// 4. IHC on the 27-member ternary tree.
void
ihc(std::ostream& log)
{
  auto g = make(SchemeId::IHC, 3, 27);
  const auto leave = plan_leave(g.state, M(1));
  require(leave.messages.size() == 6, "leave: expected 6 messages");
  const auto r = leave.messages[0].ciphertext.payload.front();
  require(*leave.new_group_key == KeyTerm::hash_iter(r, 2), "new group key is not H^2(r)");
  apply(g, leave);
  const auto join = plan_join(g.state, M(1));
  require(join.messages.size() == 4, "join: expected 4 messages, got " + std::to_string(join.messages.size()));
  apply(g, join);
  note(log, leave);
  note(log, join);
}

// 5. SD-LKH on the 27-member ternary tree.
void
sdlkh(std::ostream& log)
{
  auto g = make(SchemeId::SDLKH, 3, 27);
  const auto old = g.state;
  const auto leave = plan_leave(g.state, M(1));
  require(leave.messages.size() == 6, "leave: expected 6 messages");
  const auto d = leave.messages[0].ciphertext.payload.front();
  for (const auto& m : leave.messages) {
    require(m.ciphertext.payload.front() == d, "messages carry different payloads");
  }
  const std::set<NodeId> dirtied(leave.dirtied_nodes.begin(), leave.dirtied_nodes.end());
  for (const auto& [m, ms] : g.members) {
    if (m == M(1)) {
      continue;
    }
    for (const auto& [slot, key] : apply_plan_member(ms, leave).known) {
      const auto& before = old.tree.key(slot);
      require(key == (dirtied.contains(slot) ? xor_terms(before, d) : before), "path key is not old xor D");
    }
  }
  apply(g, leave);
  const auto join = plan_join(g.state, M(1));
  require(join.unicast_count() == 3 && join.multicast_count() == 1, "join is not 3 unicasts + 1 multicast");
  apply(g, join);
  note(log, leave);
  note(log, join);
}

// Closed-form counts for a full tree of height h, written out per scheme.
struct Law
{
  std::uint64_t leave;
  std::uint64_t join;
};

Law
law(SchemeId s, std::uint64_t k, std::uint64_t h, std::uint64_t n, std::uint64_t m)
{
  switch (s) {
    case SchemeId::LKH:
      return { k * h - 1, 2 * h };
    case SchemeId::OFC:
    case SchemeId::IHC:
    case SchemeId::SDLKH:
      return { (k - 1) * h, h + 1 };
    case SchemeId::Simple:
      return { n - 1, n };
    case SchemeId::GKMP:
      return { 2, 4 };
    case SchemeId::Hybrid:
      return { (m - 1) + (k - 1) * h, 2 + h };
  }
  return { 0, 0 };
}

// 6. Measured payload keys equal the closed forms everywhere.
void
formula_sweep(std::ostream& log)
{
  for (auto s : { SchemeId::LKH,
                  SchemeId::OFC,
                  SchemeId::IHC,
                  SchemeId::SDLKH,
                  SchemeId::Simple,
                  SchemeId::GKMP,
                  SchemeId::Hybrid }) {
    for (unsigned k = 2; k <= 3; ++k) {
      if (s == SchemeId::OFC && k == 3) {
        continue; // binary by construction
      }
      const unsigned m = s == SchemeId::Hybrid ? 3 : 1;
      for (unsigned h = 1; h <= 4; ++h) {
        const auto n = static_cast<std::uint32_t>(ipow(k, h) * m);
        const auto expect = law(s, k, h, n, m);
        const auto g = make(s, k, n, m);
        for (std::uint32_t v = 1; v <= n; ++v) {
          auto local = g;
          const auto leave = plan_leave(local.state, M(v));
          apply(local, leave);
          const auto join = plan_join(local.state, M(v));
          apply(local, join);
          const auto where = to_string(s) + " k=" + std::to_string(k) + " h=" + std::to_string(h) + " M" +
                             std::to_string(v);
          require(leave.payload_keys() == expect.leave, where + " leave");
          require(join.payload_keys() == expect.join, where + " join");
          log << leave.payload_keys() << "," << join.payload_keys() << " ";
        }
      }
    }
  }
  log << "\n";
}

// 7. Secrecy audit over randomized traces.
void
secrecy_audit(std::ostream& log)
{
  for (auto s :
       { SchemeId::LKH, SchemeId::OFC, SchemeId::IHC, SchemeId::SDLKH, SchemeId::Simple, SchemeId::Hybrid }) {
    for (std::uint64_t seed : { 1, 2, 3, 4, 5 }) {
      ScenarioConfig c;
      c.params = { s, s == SchemeId::OFC ? 2U : 3U, s == SchemeId::Hybrid ? 3U : 1U };
      c.initial_size = 24;
      c.seed = seed;
      c.events = random_events(24, 64, 100, seed);
      const auto r = run_scenario(c);
      require(r.audit.events.size() == 100, "audit does not cover every event");
      require(r.audit.all_pass(), to_string(s) + " seed " + std::to_string(seed) + " has secrecy failures");
      log << r.trace.events.back().group_key->repr() << " ";
    }
  }
  for (std::uint64_t seed : { 1, 2, 3, 4, 5 }) {
    ScenarioConfig c;
    c.params = { SchemeId::GKMP, 2, 1 };
    c.initial_size = 24;
    c.seed = seed;
    c.events = random_events(24, 64, 100, seed);
    const auto r = run_scenario(c);
    for (const auto& e : r.audit.events) {
      if (e.kind == EventKind::Leave) {
        require(e.forward_secrecy == Verdict::Fail && e.witness, "GKMP leave without a forward-secrecy failure");
      } else {
        require(e.backward_secrecy == Verdict::Pass, "GKMP join failed backward secrecy");
      }
    }
    log << r.audit.failures() << " ";
  }
  log << "\n";
}

/// Fewest child subtrees of `p` covering everyone still under it, by
/// trying every subset.
std::size_t
min_cover(const KeyTree& t, NodeId p)
{
  const auto kids = t.children(p);
  const auto want = t.subtree_members(p);
  std::size_t best = kids.size();
  for (std::uint32_t mask = 0; mask < (1U << kids.size()); ++mask) {
    std::set<MemberId> got;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (mask & (1U << i)) {
        const auto sub = t.subtree_members(kids[i]);
        got.insert(sub.begin(), sub.end());
      }
    }
    if (got == want) {
      best = std::min<std::size_t>(best, static_cast<std::size_t>(__builtin_popcount(mask)));
    }
  }
  return best;
}

// 8. Lam-Gouda batch with two leaves.
void
lam_gouda_batch(std::ostream& log)
{
  auto g = make(SchemeId::LKH, 2, 8);
  const auto held = g.members;
  BatchRequest req;
  req.leaves = { M(2), M(6) };
  const auto plan = lam_gouda_rekey(g.state, req);
  const std::set<NodeId> dirtied(plan.dirtied_nodes.begin(), plan.dirtied_nodes.end());
  const std::set<NodeId> expect{ at_label(2, 1, 2), at_label(1, 1, 2), at_label(2, 3, 2), at_label(1, 2, 2),
                                 at_label(0, 1, 2) };
  require(dirtied == expect, "dirtied set differs");
  std::size_t cover = 0;
  for (auto p : expect) {
    cover += min_cover(plan.next.tree, p);
  }
  require(cover == 8, "minimal cover oracle is not 8");
  require(plan.payload_keys() == cover, "payload keys " + std::to_string(plan.payload_keys()) + " != 8");
  for (auto m : req.leaves) {
    AttackerView v;
    for (const auto& [slot, k] : held.at(m).known) {
      v.known.push_back(k);
    }
    for (const auto& msg : plan.messages) {
      v.observed.push_back(msg.ciphertext);
    }
    require(!attacker_closure(v, { *plan.new_group_key }).derivable(*plan.new_group_key),
            to_string(m) + " can derive the new group key");
  }
  apply(g, plan);
  note(log, plan);
}

// 9. Balanced batches keep the tree shallow.
void
balanced_batches(std::ostream& log)
{
  std::mt19937_64 rng(2024);
  auto g = make(SchemeId::LKH, 2, 40);
  std::uint32_t next = 1000;
  for (int round = 0; round < 200; ++round) {
    BatchRequest req;
    const double p = g.members.size() > 100 ? 0.4 : 0.15;
    std::bernoulli_distribution leave(p);
    for (const auto& [m, _] : g.members) {
      if (leave(rng)) {
        req.leaves.push_back(m);
      }
    }
    const auto joins = std::uniform_int_distribution<std::uint32_t>(0, 12)(rng);
    for (std::uint32_t i = 0; i < joins; ++i) {
      req.joins.push_back(M(next++));
    }
    if (req.leaves.size() == g.members.size() && req.joins.empty()) {
      req.leaves.pop_back();
    }
    const auto [plan, rename] = balanced_batch_rekey(g.state, req);
    const auto n = plan.next.tree.member_count();
    require(n <= 128, "group outgrew 128 members");
    unsigned bound = 0;
    while ((std::size_t{ 1 } << bound) < n) {
      ++bound;
    }
    unsigned height = 0;
    for (const auto& [m, leaf] : plan.next.tree.placement()) {
      unsigned d = 0;
      for (NodeId x = leaf; !x.is_root(); x = NodeId{ (x.value - 1) / 2 }) {
        ++d;
      }
      height = std::max(height, d);
    }
    require(height <= bound + 1, "round " + std::to_string(round) + ": height " + std::to_string(height));
    std::set<NodeId> targets;
    for (const auto& [from, to] : rename.moves) {
      require(targets.insert(to).second, "rename is not injective");
    }
    apply(g, plan);
    log << n << ":" << height << " ";
  }
  log << "\n";
}

// 10. Hybrid costs and the cluster-size optimizer.
void
hybrid(std::ostream& log)
{
  auto g = make(SchemeId::Hybrid, 2, 24, 3);
  // Storage written both ways: the tree sum plus one seed per cluster, and
  // the closed form ((2a-1)C - 1)/(a-1).
  const std::uint64_t a = 2;
  const std::uint64_t clusters = 8;
  std::uint64_t sum = clusters;
  for (std::uint64_t level = 1; level <= clusters; level *= a) {
    sum += level;
  }
  const std::uint64_t closed = ((2 * a - 1) * clusters - 1) / (a - 1);
  require(sum == 23 && closed == 23, "storage forms disagree with 23");
  require(g.state.controller_keys_stored() == 23, "controller stores " +
                                                    std::to_string(g.state.controller_keys_stored()));
  require(hybrid_storage_sum(2, 8) == sum && hybrid_storage_closed(2, 8) == closed, "library storage forms");
  const auto plan = plan_leave(g.state, M(1));
  require(plan.payload_keys() == 5, "leave costs " + std::to_string(plan.payload_keys()));
  apply(g, plan);

  int points = 0;
  for (std::uint32_t n : { 16U, 24U, 100U, 729U, 1000U }) {
    for (unsigned base : { 2U, 3U }) {
      for (double beta : { 1.0, 2.5 }) {
        std::optional<std::uint32_t> best;
        double best_cost = 0;
        for (std::uint32_t m = 1; m <= n; ++m) {
          const double c = static_cast<double>(n) / m;
          const double lhs = (m - 1) + (base - 1) * std::log(c) / std::log(base);
          if (lhs > beta * std::log(n) / std::log(base) + 1e-12) {
            continue;
          }
          const double cost = ((2.0 * base - 1) * std::ceil(c) - 1) / (base - 1);
          if (!best || cost < best_cost) {
            best = m;
            best_cost = cost;
          }
        }
        const auto got = optimize_cluster_size(n, base, beta);
        require(got == best, "optimizer disagrees at N=" + std::to_string(n));
        log << (got ? *got : 0) << " ";
        ++points;
      }
    }
  }
  require(points == 20, "grid size");
  log << "\n";
}

std::string
slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Criterion
{
  int number;
  std::string name;
  std::function<void(std::ostream&)> check;
};

const std::vector<Criterion>&
criteria()
{
  static const std::vector<Criterion> all{
    { 1, "LKH leave on an eight-member binary tree", lkh_leave },
    { 2, "LKH rejoin sends six messages", lkh_rejoin },
    { 3, "OFC leave sends a chain of right halves", ofc_leave },
    { 4, "IHC on a 27-member ternary tree", ihc },
    { 5, "SD-LKH on a 27-member ternary tree", sdlkh },
    { 6, "measured costs equal the closed forms", formula_sweep },
    { 7, "secrecy audit over randomized traces", secrecy_audit },
    { 8, "Lam-Gouda batch with two leaves", lam_gouda_batch },
    { 9, "balanced batches stay shallow", balanced_batches },
    { 10, "hybrid costs and cluster-size optimizer", hybrid },
  };
  return all;
}

// 11. Everything above twice, plus byte-stable CLI output.
void
determinism(std::ostream&)
{
  for (const auto& c : criteria()) {
    std::ostringstream a;
    std::ostringstream b;
    c.check(a);
    c.check(b);
    require(a.str() == b.str(), "criterion " + std::to_string(c.number) + " differs between runs");
  }
  const auto root = fs::temp_directory_path() / "gkm_acceptance";
  fs::remove_all(root);
  const std::string scenario = std::string(GKM_SCENARIO_DIR) + "/batch_two_leaves.json";
  for (const std::string run : { "a", "b" }) {
    std::ostringstream out;
    std::ostringstream err;
    require(cli::run({ "run", scenario, "--deterministic", "--out-dir", (root / run / "run").string() }, out, err) ==
              cli::kOk,
            "run failed: " + err.str());
    require(cli::run({ "compare", "--sizes", "8,16", "--degrees", "2,3", "--events", "20", "--deterministic",
                       "--out-dir", (root / run / "compare").string() },
                     out,
                     err) == cli::kOk,
            "compare failed: " + err.str());
  }
  for (const auto* f : { "run/report.json", "run/report.txt", "compare/compare.tsv", "compare/compare.json" }) {
    const auto a = slurp(root / "a" / f);
    require(!a.empty() && a == slurp(root / "b" / f), std::string(f) + " is not byte-stable");
  }
  fs::remove_all(root);
}

} // namespace

int
main()
{
  int failed = 0;
  auto report = [&](int number, const std::string& name, const std::function<void(std::ostream&)>& check) {
    std::string why;
    try {
      std::ostringstream log;
      check(log);
    } catch (const Miss& m) {
      why = m.why;
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    std::cout << (why.empty() ? "PASS" : "FAIL") << " criterion " << number << ": " << name;
    if (!why.empty()) {
      std::cout << " (" << why << ")";
      ++failed;
    }
    std::cout << std::endl;
  };
  for (const auto& c : criteria()) {
    report(c.number, c.name, c.check);
  }
  report(11, "reruns and CLI outputs are identical", determinism);
  return failed == 0 ? 0 : 1;
}
