#include "gkm/report.hpp"

#include "gkm/error.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

namespace gkm {

namespace {

[[noreturn]] void
bad(const std::string& field, const std::string& what)
{
  throw Error(ErrorCode::InvalidScenario, "field '" + field + "': " + what);
}

void
reject_unknown(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      bad(where + key, "unknown field");
    }
  }
}

const Json&
require(const Json& obj, const std::string& where, const char* name)
{
  if (!obj.contains(name)) {
    bad(where + name, "missing");
  }
  return obj.at(name);
}

std::uint64_t
as_uint(const Json& v, const std::string& field)
{
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    bad(field, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string
as_string(const Json& v, const std::string& field)
{
  if (!v.is_string()) {
    bad(field, "expected a string");
  }
  return v.get<std::string>();
}

std::string
event_kind_name(EventKind k)
{
  return k == EventKind::Join ? "join" : "leave";
}

EventKind
parse_event_kind(const std::string& s, const std::string& field)
{
  if (s == "join") {
    return EventKind::Join;
  }
  if (s == "leave") {
    return EventKind::Leave;
  }
  bad(field, "expected \"join\" or \"leave\"");
}

Verdict
parse_verdict(const std::string& s)
{
  for (auto v : { Verdict::Pass, Verdict::Fail, Verdict::NotApplicable }) {
    if (to_string(v) == s) {
      return v;
    }
  }
  throw Error(ErrorCode::InvalidScenario, "unknown verdict '" + s + "'");
}

Json
fields_to_json(const CostFields& c)
{
  return Json{ { "unicast_count", c.unicast_count },
               { "multicast_count", c.multicast_count },
               { "payload_keys", c.payload_keys },
               { "bytes", c.bytes },
               { "controller_keys_stored", c.controller_keys_stored },
               { "max_member_keys_stored", c.max_member_keys_stored } };
}

CostFields
fields_from_json(const Json& j)
{
  CostFields c;
  c.unicast_count = j.at("unicast_count").get<std::uint64_t>();
  c.multicast_count = j.at("multicast_count").get<std::uint64_t>();
  c.payload_keys = j.at("payload_keys").get<std::uint64_t>();
  c.bytes = j.at("bytes").get<std::uint64_t>();
  c.controller_keys_stored = j.at("controller_keys_stored").get<std::uint64_t>();
  c.max_member_keys_stored = j.at("max_member_keys_stored").get<std::uint64_t>();
  return c;
}

Json
opt(const std::optional<std::uint64_t>& v)
{
  return v ? Json(*v) : Json(nullptr);
}

std::optional<std::uint64_t>
opt_from(const Json& j)
{
  if (j.is_null()) {
    return std::nullopt;
  }
  return j.get<std::uint64_t>();
}

std::string
show(const std::optional<std::uint64_t>& v)
{
  return v ? std::to_string(*v) : "n/a";
}

std::string
node_name(NodeId n, unsigned degree)
{
  if (n == kGkekSlot) {
    return "GKEK";
  }
  if (n == kMemberKeySlot) {
    return "member-key";
  }
  return label_string(n, degree) + "#" + std::to_string(n.value);
}

} // namespace

ScenarioConfig
scenario_from_json(const Json& j)
{
  if (!j.is_object()) {
    bad("(root)", "expected an object");
  }
  reject_unknown(j,
                 "",
                 { "version",
                   "scheme",
                   "degree",
                   "cluster_size",
                   "initial_size",
                   "events",
                   "batch_interval",
                   "batch_algorithm",
                   "seed",
                   "key_length_bits",
                   "crypto_mode" });
  if (as_uint(require(j, "", "version"), "version") != kFormatVersion) {
    bad("version", "unsupported version");
  }
  ScenarioConfig cfg;
  try {
    cfg.params.scheme = parse_scheme(as_string(require(j, "", "scheme"), "scheme"));
  } catch (const Error& e) {
    bad("scheme", e.what());
  }
  if (j.contains("degree")) {
    cfg.params.degree = static_cast<unsigned>(as_uint(j["degree"], "degree"));
  }
  if (j.contains("cluster_size")) {
    cfg.params.cluster_size = static_cast<unsigned>(as_uint(j["cluster_size"], "cluster_size"));
  }
  cfg.initial_size = static_cast<std::uint32_t>(as_uint(require(j, "", "initial_size"), "initial_size"));
  cfg.seed = as_uint(require(j, "", "seed"), "seed");
  if (j.contains("key_length_bits")) {
    cfg.key_length_bits = static_cast<unsigned>(as_uint(j["key_length_bits"], "key_length_bits"));
  }
  if (j.contains("crypto_mode")) {
    const auto mode = as_string(j["crypto_mode"], "crypto_mode");
    if (mode == "symbolic") {
      cfg.crypto_mode = CryptoMode::Symbolic;
    } else if (mode == "concrete") {
      cfg.crypto_mode = CryptoMode::Concrete;
    } else {
      bad("crypto_mode", "expected \"symbolic\" or \"concrete\"");
    }
  }
  if (j.contains("batch_interval") && !j["batch_interval"].is_null()) {
    cfg.batch_interval = as_uint(j["batch_interval"], "batch_interval");
  }
  if (j.contains("batch_algorithm")) {
    try {
      cfg.batch_algorithm = parse_batch_algorithm(as_string(j["batch_algorithm"], "batch_algorithm"));
    } catch (const Error& e) {
      bad("batch_algorithm", e.what());
    }
  }
  const auto& events = require(j, "", "events");
  if (!events.is_array()) {
    bad("events", "expected an array");
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto where = "events[" + std::to_string(i) + "].";
    const auto& e = events[i];
    if (!e.is_object()) {
      bad(where.substr(0, where.size() - 1), "expected an object");
    }
    reject_unknown(e, where, { "tick", "kind", "member" });
    MembershipEvent ev;
    ev.tick = as_uint(require(e, where, "tick"), where + "tick");
    ev.kind = parse_event_kind(as_string(require(e, where, "kind"), where + "kind"), where + "kind");
    ev.member = MemberId{ static_cast<std::uint32_t>(as_uint(require(e, where, "member"), where + "member")) };
    cfg.events.push_back(ev);
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig
parse_scenario(const std::string& text)
{
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw Error(ErrorCode::InvalidScenario, "line " + std::to_string(line) + ": " + e.what());
  }
  return scenario_from_json(j);
}

Json
scenario_to_json(const ScenarioConfig& cfg)
{
  Json events = Json::array();
  for (const auto& e : cfg.events) {
    events.push_back({ { "tick", e.tick }, { "kind", event_kind_name(e.kind) }, { "member", e.member.value } });
  }
  Json j{ { "version", kFormatVersion },
          { "scheme", to_string(cfg.params.scheme) },
          { "degree", cfg.params.degree },
          { "cluster_size", cfg.params.cluster_size },
          { "initial_size", cfg.initial_size },
          { "seed", cfg.seed },
          { "key_length_bits", cfg.key_length_bits },
          { "crypto_mode", cfg.crypto_mode == CryptoMode::Concrete ? "concrete" : "symbolic" } };
  j["batch_interval"] = opt(cfg.batch_interval);
  j["batch_algorithm"] = to_string(cfg.batch_algorithm);
  j["events"] = std::move(events);
  return j;
}

Json
cost_to_json(const CostReport& r)
{
  Json events = Json::array();
  for (const auto& e : r.events) {
    events.push_back({ { "index", e.index },
                       { "label", e.label },
                       { "measured", fields_to_json(e.measured) },
                       { "predicted",
                         { { "messages", opt(e.predicted.messages) },
                           { "payload_keys", opt(e.predicted.payload_keys) },
                           { "bytes", opt(e.predicted.bytes) },
                           { "controller_keys_stored", opt(e.predicted.controller_keys_stored) },
                           { "max_member_keys_stored", opt(e.predicted.max_member_keys_stored) } } } });
  }
  return Json{ { "scheme", to_string(r.params.scheme) },
               { "degree", r.params.degree },
               { "cluster_size", r.params.cluster_size },
               { "key_length_bits", r.key_length_bits },
               { "events", std::move(events) },
               { "total", fields_to_json(r.total) } };
}

CostReport
cost_from_json(const Json& j)
{
  CostReport r;
  r.params.scheme = parse_scheme(j.at("scheme").get<std::string>());
  r.params.degree = j.at("degree").get<unsigned>();
  r.params.cluster_size = j.at("cluster_size").get<unsigned>();
  r.key_length_bits = j.at("key_length_bits").get<unsigned>();
  for (const auto& e : j.at("events")) {
    EventCost c;
    c.index = e.at("index").get<std::uint64_t>();
    c.label = e.at("label").get<std::string>();
    c.measured = fields_from_json(e.at("measured"));
    const auto& p = e.at("predicted");
    c.predicted.messages = opt_from(p.at("messages"));
    c.predicted.payload_keys = opt_from(p.at("payload_keys"));
    c.predicted.bytes = opt_from(p.at("bytes"));
    c.predicted.controller_keys_stored = opt_from(p.at("controller_keys_stored"));
    c.predicted.max_member_keys_stored = opt_from(p.at("max_member_keys_stored"));
    r.events.push_back(std::move(c));
  }
  r.total = fields_from_json(j.at("total"));
  return r;
}

Json
audit_to_json(const AuditReport& r)
{
  Json events = Json::array();
  for (const auto& e : r.events) {
    events.push_back({ { "index", e.index },
                       { "member", e.member.value },
                       { "kind", event_kind_name(e.kind) },
                       { "forward_secrecy", to_string(e.forward_secrecy) },
                       { "backward_secrecy", to_string(e.backward_secrecy) },
                       { "witness", e.witness ? Json(*e.witness) : Json(nullptr) },
                       { "opened", e.opened } });
  }
  return Json{ { "all_pass", r.all_pass() }, { "failures", r.failures() }, { "events", std::move(events) } };
}

AuditReport
audit_from_json(const Json& j)
{
  AuditReport r;
  for (const auto& e : j.at("events")) {
    EventAudit a;
    a.index = e.at("index").get<std::uint64_t>();
    a.member = MemberId{ e.at("member").get<std::uint32_t>() };
    a.kind = parse_event_kind(e.at("kind").get<std::string>(), "kind");
    a.forward_secrecy = parse_verdict(e.at("forward_secrecy").get<std::string>());
    a.backward_secrecy = parse_verdict(e.at("backward_secrecy").get<std::string>());
    if (!e.at("witness").is_null()) {
      a.witness = e.at("witness").get<std::string>();
    }
    a.opened = e.at("opened").get<std::vector<std::uint64_t>>();
    r.events.push_back(std::move(a));
  }
  return r;
}

Json
trace_to_json(const Trace& t, unsigned degree)
{
  Json events = Json::array();
  for (const auto& e : t.events) {
    Json messages = Json::array();
    for (const auto& m : e.messages) {
      Json payload = Json::array();
      Json targets = Json::array();
      for (std::size_t i = 0; i < m.ciphertext.payload.size(); ++i) {
        payload.push_back(m.ciphertext.payload[i].repr());
        targets.push_back(m.ciphertext.targets[i].value);
      }
      Json recipients = Json::array();
      for (auto r : m.recipients) {
        recipients.push_back(r.value);
      }
      Json rec{ { "seq", m.ciphertext.seq },
                { "kind", to_string(m.kind) },
                { "role", to_string(m.role) },
                { "enc_node", m.enc_node ? Json(m.enc_node->value) : Json(nullptr) },
                { "enc_label", m.enc_node ? Json(node_name(*m.enc_node, degree)) : Json(nullptr) },
                { "enc_key", m.ciphertext.enc_key.repr() },
                { "target_nodes", std::move(targets) },
                { "payload", std::move(payload) },
                { "recipients", std::move(recipients) } };
      if (m.destination_node) {
        rec["destination_node"] = m.destination_node->value;
      }
      if (m.new_position) {
        rec["new_position"] = m.new_position->value;
      }
      messages.push_back(std::move(rec));
    }
    Json joins = Json::array();
    for (auto m : e.joins) {
      joins.push_back(m.value);
    }
    Json leaves = Json::array();
    for (auto m : e.leaves) {
      leaves.push_back(m.value);
    }
    Json rec{ { "index", e.index },
              { "tick", e.tick },
              { "batch", e.batch },
              { "joins", std::move(joins) },
              { "leaves", std::move(leaves) },
              { "group_key", e.group_key ? Json(e.group_key->repr()) : Json(nullptr) },
              { "messages", std::move(messages) } };
    if (!e.group_key_fingerprint.empty()) {
      rec["group_key_fingerprint"] = e.group_key_fingerprint;
    }
    events.push_back(std::move(rec));
  }
  return Json{ { "initial_group_key", t.initial_group_key ? Json(t.initial_group_key->repr()) : Json(nullptr) },
               { "events", std::move(events) } };
}

std::string
render_cost_text(const CostReport& r)
{
  std::ostringstream out;
  out << "scheme " << to_string(r.params.scheme) << ", degree " << r.params.degree;
  if (r.params.scheme == SchemeId::Hybrid) {
    out << ", cluster size " << r.params.cluster_size;
  }
  out << ", key length " << r.key_length_bits << " bits\n";
  out << std::left << std::setw(6) << "#" << std::setw(24) << "event" << std::right << std::setw(6) << "uni"
      << std::setw(7) << "multi" << std::setw(9) << "payload" << std::setw(10) << "predicted" << std::setw(9)
      << "bytes" << std::setw(8) << "ctrl" << std::setw(8) << "member" << "\n";
  for (const auto& e : r.events) {
    out << std::left << std::setw(6) << e.index << std::setw(24) << e.label << std::right << std::setw(6)
        << e.measured.unicast_count << std::setw(7) << e.measured.multicast_count << std::setw(9)
        << e.measured.payload_keys << std::setw(10) << show(e.predicted.payload_keys) << std::setw(9)
        << e.measured.bytes << std::setw(8) << e.measured.controller_keys_stored << std::setw(8)
        << e.measured.max_member_keys_stored << "\n";
  }
  out << std::left << std::setw(30) << "total" << std::right << std::setw(6) << r.total.unicast_count
      << std::setw(7) << r.total.multicast_count << std::setw(9) << r.total.payload_keys << std::setw(10) << ""
      << std::setw(9) << r.total.bytes << "\n";
  return out.str();
}

std::string
render_audit_text(const AuditReport& r)
{
  std::ostringstream out;
  for (const auto& e : r.events) {
    out << "event " << e.index << " " << event_kind_name(e.kind) << " " << to_string(e.member) << ": ";
    if (e.kind == EventKind::Leave) {
      out << "forward secrecy " << to_string(e.forward_secrecy);
    } else {
      out << "backward secrecy " << to_string(e.backward_secrecy);
    }
    if (e.witness) {
      out << " (derivable " << *e.witness << ")";
    }
    out << "\n";
  }
  out << (r.all_pass() ? "audit: all pass" : "audit: " + std::to_string(r.failures()) + " failure(s)") << "\n";
  return out.str();
}

std::string
render_trace_text(const Trace& t, unsigned degree)
{
  std::ostringstream out;
  if (t.initial_group_key) {
    out << "initial group key " << t.initial_group_key->repr() << "\n";
  }
  for (const auto& e : t.events) {
    out << "event " << e.index << " at tick " << e.tick;
    for (auto m : e.leaves) {
      out << " -" << to_string(m);
    }
    for (auto m : e.joins) {
      out << " +" << to_string(m);
    }
    out << "\n";
    for (const auto& m : e.messages) {
      out << "  [" << m.ciphertext.seq << "] " << to_string(m.kind) << " {";
      for (std::size_t i = 0; i < m.ciphertext.payload.size(); ++i) {
        out << (i ? ", " : "") << m.ciphertext.payload[i].repr() << " -> "
            << node_name(m.ciphertext.targets[i], degree);
      }
      out << "} under " << m.ciphertext.enc_key.repr();
      if (m.enc_node) {
        out << " at " << node_name(*m.enc_node, degree);
      }
      out << " to {";
      bool first = true;
      for (auto r : m.recipients) {
        out << (first ? "" : ",") << to_string(r);
        first = false;
      }
      out << "}";
      if (m.destination_node && m.new_position) {
        out << " rename " << m.destination_node->value << "->" << m.new_position->value;
      }
      out << "\n";
    }
    if (e.group_key) {
      out << "  group key " << e.group_key->repr();
      if (!e.group_key_fingerprint.empty()) {
        out << " [" << e.group_key_fingerprint << "]";
      }
      out << "\n";
    }
  }
  return out.str();
}

} // namespace gkm
