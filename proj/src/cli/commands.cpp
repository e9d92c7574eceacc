#include "gkm/cli.hpp"

#include "gkm/error.hpp"
#include "gkm/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace gkm::cli {

namespace {

namespace fs = std::filesystem;

struct Common
{
  std::string out_dir;
  std::string format = "text";
  bool deterministic = false;
  std::optional<std::uint64_t> seed;
};

std::string
timestamp()
{
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void
stamp(Json& doc, const Common& c)
{
  if (!c.deterministic) {
    doc["generated_at"] = timestamp();
  }
}

void
write_file(const Common& c, const std::string& name, const std::string& body)
{
  if (c.out_dir.empty()) {
    return;
  }
  fs::create_directories(c.out_dir);
  std::ofstream f(fs::path(c.out_dir) / name, std::ios::binary);
  if (!f) {
    throw Error(ErrorCode::InvalidParams, "cannot write " + (fs::path(c.out_dir) / name).string());
  }
  f << body;
}

ScenarioConfig
load(const std::string& path, const Common& c)
{
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw Error(ErrorCode::InvalidScenario, "cannot read " + path);
  }
  std::stringstream buf;
  buf << f.rdbuf();
  auto cfg = parse_scenario(buf.str());
  if (c.seed) {
    cfg.seed = *c.seed;
  }
  return cfg;
}

int
verdict_exit(const ScenarioConfig& cfg, const AuditReport& audit, bool expect_insecure)
{
  if (audit.all_pass() || (cfg.params.scheme == SchemeId::GKMP && expect_insecure)) {
    return kOk;
  }
  return kSecrecyFailure;
}

int
cmd_run(const std::string& path, const Common& c, bool expect_insecure, std::ostream& out)
{
  const auto cfg = load(path, c);
  const auto res = run_scenario(cfg);
  Json doc{ { "version", kFormatVersion },
            { "scenario", scenario_to_json(cfg) },
            { "cost", cost_to_json(res.cost) },
            { "audit", audit_to_json(res.audit) } };
  stamp(doc, c);
  const auto text = render_cost_text(res.cost) + "\n" + render_audit_text(res.audit);
  write_file(c, "report.json", doc.dump(2) + "\n");
  write_file(c, "report.txt", text);
  out << (c.format == "structured" ? doc.dump(2) + "\n" : text);
  return verdict_exit(cfg, res.audit, expect_insecure);
}

int
cmd_audit(const std::string& path, const Common& c, bool expect_insecure, std::ostream& out)
{
  const auto cfg = load(path, c);
  const auto res = run_scenario(cfg);
  Json doc{ { "version", kFormatVersion }, { "audit", audit_to_json(res.audit) } };
  stamp(doc, c);
  const auto text = render_audit_text(res.audit);
  write_file(c, "audit.json", doc.dump(2) + "\n");
  write_file(c, "audit.txt", text);
  out << (c.format == "structured" ? doc.dump(2) + "\n" : text);
  return verdict_exit(cfg, res.audit, expect_insecure);
}

int
cmd_trace(const std::string& path, const Common& c, std::ostream& out)
{
  const auto cfg = load(path, c);
  const auto res = run_scenario(cfg);
  const unsigned degree = res.trace.final_state.tree.degree();
  Json doc{ { "version", kFormatVersion }, { "trace", trace_to_json(res.trace, degree) } };
  stamp(doc, c);
  const auto text = render_trace_text(res.trace, degree);
  write_file(c, "trace.json", doc.dump(2) + "\n");
  write_file(c, "trace.txt", text);
  out << (c.format == "structured" ? doc.dump(2) + "\n" : text);
  return kOk;
}

struct CompareRow
{
  SchemeParams params;
  std::uint32_t n = 0;
  CostFields leave;
  CostFields join;
  PredictedCost leave_predicted;
  PredictedCost join_predicted;
  std::size_t forward_failures = 0;
  std::size_t backward_failures = 0;
  std::size_t audited = 0;
};

std::string
show(const std::optional<std::uint64_t>& v)
{
  return v ? std::to_string(*v) : "n/a";
}

CompareRow
compare_cell(const SchemeParams& params, std::uint32_t n, std::size_t extra_events, std::uint64_t seed)
{
  ScenarioConfig cfg;
  cfg.params = params;
  cfg.initial_size = n;
  cfg.seed = seed;
  cfg.events.push_back({ 0, EventKind::Leave, MemberId{ 1 } });
  cfg.events.push_back({ 1, EventKind::Join, MemberId{ 1 } });
  for (auto e : random_events(n, std::max<std::uint32_t>(2 * n, 4), extra_events, seed)) {
    e.tick += 2;
    cfg.events.push_back(e);
  }
  const auto res = run_scenario(cfg);
  CompareRow row;
  row.params = params;
  row.n = n;
  row.leave = res.cost.events[0].measured;
  row.join = res.cost.events[1].measured;
  row.leave_predicted = res.cost.events[0].predicted;
  row.join_predicted = res.cost.events[1].predicted;
  for (const auto& a : res.audit.events) {
    ++row.audited;
    row.forward_failures += a.forward_secrecy == Verdict::Fail ? 1 : 0;
    row.backward_failures += a.backward_secrecy == Verdict::Fail ? 1 : 0;
  }
  return row;
}

template<typename T>
std::vector<T>
split_list(const std::string& s, T (*conv)(const std::string&))
{
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      out.push_back(conv(item));
    }
  }
  return out;
}

unsigned
to_unsigned(const std::string& s)
{
  std::size_t used = 0;
  const auto v = std::stoul(s, &used);
  if (used != s.size()) {
    throw Error(ErrorCode::InvalidParams, "not a number: " + s);
  }
  return static_cast<unsigned>(v);
}

int
cmd_compare(const std::string& schemes,
            const std::string& degrees,
            const std::string& sizes,
            unsigned cluster_size,
            std::size_t extra_events,
            const Common& c,
            std::ostream& out,
            std::ostream& err)
{
  std::vector<SchemeId> scheme_list;
  std::vector<unsigned> degree_list;
  std::vector<unsigned> size_list;
  try {
    scheme_list = split_list<SchemeId>(schemes, &parse_scheme);
    degree_list = split_list<unsigned>(degrees, &to_unsigned);
    size_list = split_list<unsigned>(sizes, &to_unsigned);
  } catch (const std::exception& e) {
    err << "invalid grid: " << e.what() << "\n";
    return kUsage;
  }
  if (scheme_list.empty() || degree_list.empty() || size_list.empty()) {
    err << "invalid grid: schemes, degrees and sizes must be nonempty\n";
    return kUsage;
  }
  const std::uint64_t seed = c.seed.value_or(1);

  std::vector<CompareRow> rows;
  for (auto s : scheme_list) {
    for (auto k : degree_list) {
      for (auto n : size_list) {
        SchemeParams p{ s, k, s == SchemeId::Hybrid ? cluster_size : 1U };
        try {
          p.validate();
        } catch (const Error& e) {
          err << "skipping " << to_string(s) << " k=" << k << " N=" << n << ": " << e.what() << "\n";
          continue;
        }
        if (n < 2) {
          err << "skipping " << to_string(s) << " k=" << k << " N=" << n << ": need at least 2 members\n";
          continue;
        }
        rows.push_back(compare_cell(p, n, extra_events, seed));
      }
    }
  }
  if (rows.empty()) {
    err << "invalid grid: no valid cells\n";
    return kUsage;
  }

  std::ostringstream tsv;
  if (!c.deterministic) {
    tsv << "# generated " << timestamp() << "\n";
  }
  tsv << "scheme\tk\tM\tN\tleave_msgs\tleave_payload\tleave_predicted\tjoin_msgs\tjoin_payload\tjoin_"
         "predicted\tjoin_unicast\tjoin_multicast\tcontroller_keys\tmember_keys\tforward\tbackward\n";
  Json cells = Json::array();
  for (const auto& r : rows) {
    const std::string fwd = r.forward_failures == 0 ? "pass" : "FAIL";
    const std::string bwd = r.backward_failures == 0 ? "pass" : "FAIL";
    tsv << to_string(r.params.scheme) << '\t' << r.params.degree << '\t' << r.params.cluster_size << '\t' << r.n
        << '\t' << r.leave.messages() << '\t' << r.leave.payload_keys << '\t' << show(r.leave_predicted.payload_keys)
        << '\t' << r.join.messages() << '\t' << r.join.payload_keys << '\t' << show(r.join_predicted.payload_keys)
        << '\t' << r.join.unicast_count << '\t' << r.join.multicast_count << '\t' << r.join.controller_keys_stored
        << '\t' << r.join.max_member_keys_stored << '\t' << fwd << '\t' << bwd << '\n';
    cells.push_back({ { "scheme", to_string(r.params.scheme) },
                      { "degree", r.params.degree },
                      { "cluster_size", r.params.cluster_size },
                      { "initial_size", r.n },
                      { "leave_messages", r.leave.messages() },
                      { "leave_payload_keys", r.leave.payload_keys },
                      { "leave_predicted_payload_keys",
                        r.leave_predicted.payload_keys ? Json(*r.leave_predicted.payload_keys) : Json(nullptr) },
                      { "join_messages", r.join.messages() },
                      { "join_payload_keys", r.join.payload_keys },
                      { "join_predicted_payload_keys",
                        r.join_predicted.payload_keys ? Json(*r.join_predicted.payload_keys) : Json(nullptr) },
                      { "join_unicast", r.join.unicast_count },
                      { "join_multicast", r.join.multicast_count },
                      { "controller_keys_stored", r.join.controller_keys_stored },
                      { "member_keys_stored", r.join.max_member_keys_stored },
                      { "audited_events", r.audited },
                      { "forward_secrecy", fwd },
                      { "backward_secrecy", bwd } });
  }
  Json doc{ { "version", kFormatVersion }, { "seed", seed }, { "events_per_run", extra_events }, { "rows", cells } };
  stamp(doc, c);
  write_file(c, "compare.tsv", tsv.str());
  write_file(c, "compare.json", doc.dump(2) + "\n");
  out << (c.format == "structured" ? doc.dump(2) + "\n" : tsv.str());
  return kOk;
}

} // namespace

int
run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Group key management simulator", "gkmsim" };
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out-dir", common.out_dir, "Directory for report files");
    sub->add_option("--format", common.format, "Console output format")
      ->check(CLI::IsMember({ "text", "structured" }));
    sub->add_flag("--deterministic", common.deterministic, "Omit timestamps from outputs");
    sub->add_option("--seed", seed, "Override the scenario seed");
  };

  std::string scenario;
  bool expect_insecure = false;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and report costs and secrecy");
  run_cmd->add_option("scenario", scenario, "Scenario file")->required();
  run_cmd->add_flag("--expect-insecure", expect_insecure, "Accept the GKMP forward-secrecy failure");
  add_common(run_cmd);

  auto* audit_cmd = app.add_subcommand("audit", "Run a scenario and print the secrecy audit");
  audit_cmd->add_option("scenario", scenario, "Scenario file")->required();
  audit_cmd->add_flag("--expect-insecure", expect_insecure, "Accept the GKMP forward-secrecy failure");
  add_common(audit_cmd);

  auto* trace_cmd = app.add_subcommand("trace", "Dump every rekey message of a scenario");
  trace_cmd->add_option("scenario", scenario, "Scenario file")->required();
  add_common(trace_cmd);

  std::string schemes = "LKH,OFC,IHC,SDLKH,Simple,GKMP,Hybrid";
  std::string degrees = "2";
  std::string sizes = "8";
  unsigned cluster_size = 3;
  std::size_t events = 0;
  auto* compare_cmd = app.add_subcommand("compare", "Measure join/leave costs over a grid");
  compare_cmd->add_option("--schemes", schemes, "Comma-separated schemes");
  compare_cmd->add_option("--degrees", degrees, "Comma-separated tree degrees");
  compare_cmd->add_option("--sizes", sizes, "Comma-separated group sizes");
  compare_cmd->add_option("--cluster-size", cluster_size, "Hybrid cluster size");
  compare_cmd->add_option("--events", events, "Random events appended to each run");
  add_common(compare_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kUsage;
  }
  for (auto* sub : { run_cmd, audit_cmd, trace_cmd, compare_cmd }) {
    if (sub->parsed() && sub->count("--seed") > 0) {
      common.seed = seed;
    }
  }

  try {
    if (run_cmd->parsed()) {
      return cmd_run(scenario, common, expect_insecure, out);
    }
    if (audit_cmd->parsed()) {
      return cmd_audit(scenario, common, expect_insecure, out);
    }
    if (trace_cmd->parsed()) {
      return cmd_trace(scenario, common, out);
    }
    return cmd_compare(schemes, degrees, sizes, cluster_size, events, common, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InternalInconsistency ? kInternal : kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

} // namespace gkm::cli
