#include "gkm/sim.hpp"

#include <algorithm>

namespace gkm {

std::string
to_string(Verdict v)
{
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "FAIL";
    case Verdict::NotApplicable:
      return "n/a";
  }
  return "?";
}

bool
AuditReport::all_pass() const
{
  return failures() == 0;
}

std::size_t
AuditReport::failures() const
{
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const EventAudit& e) {
    return e.forward_secrecy == Verdict::Fail || e.backward_secrecy == Verdict::Fail;
  }));
}

namespace {

struct Checked
{
  Verdict verdict = Verdict::Pass;
  std::optional<std::string> witness;
};

Checked
check_keys(const Closure& c, const std::vector<std::pair<std::uint64_t, KeyTerm>>& targets, const char* label)
{
  Checked out;
  for (const auto& [when, key] : targets) {
    if (c.derivable(key)) {
      out.verdict = Verdict::Fail;
      out.witness = std::string(label) + " after event " + std::to_string(when) + ": " + key.repr();
      break;
    }
  }
  return out;
}

} // namespace

AuditReport
audit_secrecy(const Trace& trace)
{
  // Multicast is public and a persona is assumed to overhear unicasts as
  // well; the attacker sees every ciphertext of the run.
  std::vector<Ciphertext> observed;
  for (const auto& e : trace.events) {
    for (const auto& m : e.messages) {
      observed.push_back(m.ciphertext);
    }
  }

  AuditReport report;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const auto& e = trace.events[i];

    for (const auto& [m, keys] : e.departed_keys) {
      // Keys from this event until the member is readmitted.
      std::vector<std::pair<std::uint64_t, KeyTerm>> future;
      for (std::size_t j = i; j < trace.events.size(); ++j) {
        const auto& f = trace.events[j];
        if (j > i && std::find(f.joins.begin(), f.joins.end(), m) != f.joins.end()) {
          break;
        }
        if (f.group_key) {
          future.emplace_back(f.index, *f.group_key);
        }
      }
      std::vector<KeyTerm> targets;
      for (const auto& [_, k] : future) {
        targets.push_back(k);
      }
      const auto c = attacker_closure({ Persona::DepartedMember, keys, observed }, targets);
      const auto r = check_keys(c, future, "group key");
      report.events.push_back({ e.index, m, EventKind::Leave, r.verdict, Verdict::NotApplicable, r.witness, c.opened() });
    }

    for (const auto& [m, keys] : e.joined_keys) {
      std::vector<std::pair<std::uint64_t, KeyTerm>> past;
      if (trace.initial_group_key) {
        past.emplace_back(0, *trace.initial_group_key);
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (trace.events[j].group_key) {
          past.emplace_back(trace.events[j].index, *trace.events[j].group_key);
        }
      }
      std::vector<KeyTerm> targets;
      for (const auto& [_, k] : past) {
        targets.push_back(k);
      }
      std::vector<Ciphertext> prior;
      for (std::size_t j = 0; j <= i; ++j) {
        for (const auto& msg : trace.events[j].messages) {
          prior.push_back(msg.ciphertext);
        }
      }
      const auto c = attacker_closure({ Persona::JoiningMember, keys, prior }, targets);
      const auto r = check_keys(c, past, "earlier group key");
      report.events.push_back({ e.index, m, EventKind::Join, Verdict::NotApplicable, r.verdict, r.witness, c.opened() });
    }
  }
  return report;
}

} // namespace gkm
