#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "snmpkit/agent.hpp"
#include "snmpkit/client.hpp"
#include "snmpkit/format.hpp"
#include "snmpkit/smi.hpp"

namespace snmp::cli {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct ClientOptions {
  std::string version;
  std::string community;
  int port = 0;
  double timeout = 0;
  int retries = -1;
  std::string user;
  std::string level;
  std::string auth_protocol = "MD5";
  std::string auth_pass;
  std::string priv_protocol = "DES";
  std::string priv_pass;
  std::string context;
  std::string mib_path;
};

void add_client_options(CLI::App* cmd, ClientOptions& o) {
  cmd->add_option("-v,--snmp-version", o.version, "SNMP version: 1, 2c or 3");
  cmd->add_option("-c,--community", o.community, "Community string");
  cmd->add_option("-p,--port", o.port, "Agent UDP port (host:port also accepted)");
  cmd->add_option("-t,--timeout", o.timeout, "Initial and minimum retransmission timeout, seconds");
  cmd->add_option("-r,--retries", o.retries, "Retransmissions before giving up");
  cmd->add_option("-u,--user", o.user, "SNMPv3 user name");
  cmd->add_option("-l,--level", o.level, "noAuthNoPriv, authNoPriv or authPriv");
  cmd->add_option("-a,--auth-protocol", o.auth_protocol, "MD5 or SHA");
  cmd->add_option("-A,--auth-pass", o.auth_pass, "Authentication passphrase");
  cmd->add_option("-x,--priv-protocol", o.priv_protocol, "DES");
  cmd->add_option("-X,--priv-pass", o.priv_pass, "Privacy passphrase");
  cmd->add_option("-n,--context", o.context, "SNMPv3 context name");
  cmd->add_option("-M,--mib-path", o.mib_path, "Directories of compiled MIBs, ':'-separated");
}

std::string mib_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  return mib::default_mib_path();
}

void load_registry(mib::Registry& registry, const std::string& flag) {
  mib::load_mib_path(registry, mib_path(flag));
}

struct Target {
  std::string host;
  std::optional<std::uint16_t> port;
};

Target parse_target(const std::string& text) {
  Target t;
  std::string s = text;
  if (s.rfind("udp:", 0) == 0) s = s.substr(4);
  std::string port;
  if (!s.empty() && s[0] == '[') {
    auto close = s.find(']');
    if (close == std::string::npos) throw UsageError("bad address: " + text);
    t.host = s.substr(1, close - 1);
    if (close + 1 < s.size() && s[close + 1] == ':') port = s.substr(close + 2);
  } else if (std::count(s.begin(), s.end(), ':') == 1) {
    auto colon = s.find(':');
    t.host = s.substr(0, colon);
    port = s.substr(colon + 1);
  } else {
    t.host = s;
  }
  if (!port.empty()) {
    char* end = nullptr;
    long p = std::strtol(port.c_str(), &end, 10);
    if (*end || p <= 0 || p > 65535) throw UsageError("bad port: " + port);
    t.port = static_cast<std::uint16_t>(p);
  }
  if (t.host.empty()) throw UsageError("missing host");
  return t;
}

SessionOptions session_options(const ClientOptions& o, const Target& target, const mib::Registry& registry) {
  SessionOptions s;
  s.registry = &registry;
  if (!o.version.empty()) {
    auto v = parse_version(o.version);
    if (!v) throw UsageError("unknown SNMP version: " + o.version);
    s.version = *v;
  }
  if (!o.community.empty()) s.community = o.community;
  if (o.port) s.port = static_cast<std::uint16_t>(o.port);
  if (target.port) s.port = target.port;
  if (o.timeout > 0) {
    s.rtt.initial_rto = o.timeout;
    s.rtt.min_rto = std::min(o.timeout, s.rtt.min_rto);
  }
  if (o.retries >= 0) s.rtt.max_retries = o.retries;
  s.context_name = o.context;

  if (s.version == Version::v3) {
    if (o.user.empty()) throw UsageError("SNMPv3 requires -u USER");
    usm::Credential c;
    c.user = o.user;
    std::string level = o.level;
    if (level.empty()) level = !o.priv_pass.empty() ? "authPriv" : !o.auth_pass.empty() ? "authNoPriv" : "noAuthNoPriv";
    if (level != "noAuthNoPriv" && level != "authNoPriv" && level != "authPriv")
      throw UsageError("unknown security level: " + level);
    if (level != "noAuthNoPriv") {
      auto proto = usm::parse_auth_protocol(o.auth_protocol);
      if (!proto) throw UsageError("unknown authentication protocol: " + o.auth_protocol);
      if (o.auth_pass.empty()) throw UsageError(level + " requires -A PASSPHRASE");
      c.auth = usm::Credential::Auth{*proto, o.auth_pass};
    }
    if (level == "authPriv") {
      auto proto = usm::parse_priv_protocol(o.priv_protocol);
      if (!proto) throw UsageError("unknown privacy protocol: " + o.priv_protocol);
      if (o.priv_pass.empty()) throw UsageError("authPriv requires -X PASSPHRASE");
      c.priv = usm::Credential::Priv{*proto, o.priv_pass};
    }
    s.credential = c;
  }
  return s;
}

std::string target_text(const Target& t, const SessionOptions& s) {
  return t.host + ":" + std::to_string(s.port.value_or(defaults().port));
}

void print_bindings(std::ostream& out, const std::vector<Binding>& bindings, const mib::Registry& registry) {
  for (const auto& b : bindings) out << format_binding(b, registry) << '\n';
}

void print_table(std::ostream& out, const std::vector<TableRow>& rows, const mib::TableSchema& schema,
                 const mib::Registry& registry) {
  std::vector<std::string> header{"index"};
  for (const auto* col : schema.columns)
    if (col->info().max_access.value_or(mib::Access::read_only) != mib::Access::not_accessible)
      header.push_back(col->name().value_or(std::to_string(col->arc())));
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : rows) {
    std::vector<std::string> line{to_dotted(row.index())};
    for (const auto& c : row.plain_value()) line.push_back(format_plain(c.value, registry));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& line : cells)
    for (std::size_t i = 0; i < line.size() && i < width.size(); ++i) width[i] = std::max(width[i], line[i].size());
  auto emit = [&](const std::vector<std::string>& line) {
    std::string text;
    for (std::size_t i = 0; i < line.size(); ++i) {
      text += line[i];
      if (i + 1 < line.size()) text += std::string(width[i] - line[i].size() + 2, ' ');
    }
    out << text << '\n';
  };
  out << "SNMP table: " << mib::OidRef(*schema.table).to_string() << "\n\n";
  emit(header);
  for (const auto& line : cells) emit(line);
}

// Runs a client command, mapping failures to exit codes.
template <typename F>
int client_command(const ClientOptions& opts, const std::string& host, std::ostream& out, std::ostream& err,
                   F&& body) {
  mib::Registry registry;
  std::string where = host;
  try {
    load_registry(registry, opts.mib_path);
    Target target = parse_target(host);
    SessionOptions s = session_options(opts, target, registry);
    where = target_text(target, s);
    Session session(target.host, s);
    body(session, registry, out);
    return kOk;
  } catch (const net::TimeoutError&) {
    err << "Timeout: No Response from " << where << ".\n";
    return kTimeout;
  } catch (const SnmpStatusError& e) {
    err << "Error in packet.\nReason: " << to_string(e.status()) << '\n';
    if (e.index() > 0 && static_cast<std::size_t>(e.index()) <= e.bindings().size())
      err << "Failed object: "
          << registry.resolve(mib::OidSpec(e.bindings()[static_cast<std::size_t>(e.index() - 1)].name)).to_string()
          << '\n';
    return kSnmpError;
  } catch (const mib::ResolveError& e) {
    err << "Unknown Object Identifier (" << e.segment() << "): " << e.what() << '\n';
    return kUsage;
  } catch (const mib::OidParseError& e) {
    err << "Invalid object identifier: " << e.what() << '\n';
    return kUsage;
  } catch (const mib::NotATableError& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const ArgumentError& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kSnmpError;
  }
}

int cmd_mibc(const std::vector<std::string>& inputs, const std::string& out_dir, std::ostream& out,
             std::ostream& err) {
  int status = kOk;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  for (const auto& input : inputs) {
    std::ifstream in(input, std::ios::binary);
    if (!in) {
      err << input << ": cannot read\n";
      status = kSnmpError;
      continue;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      mib::CompiledMibModule module = mib::compile(buf.str());
      for (const auto& w : module.warnings) err << input << ":" << w.line << ":" << w.column << ": warning: " << w.message << '\n';
      auto path = std::filesystem::path(out_dir) / (module.header.name + ".cmib");
      std::ofstream sink(path, std::ios::binary);
      mib::emit(module, sink);
      if (!sink) {
        err << path.string() << ": cannot write\n";
        status = kSnmpError;
        continue;
      }
      out << module.header.name << " -> " << path.string() << '\n';
    } catch (const mib::SmiParseError& e) {
      err << input << ":" << e.line() << ":" << e.column() << ": " << e.what() << '\n';
      status = kSnmpError;
    } catch (const mib::LexError& e) {
      err << input << ":" << e.line() << ":" << e.column() << ": " << e.what() << '\n';
      status = kSnmpError;
    }
  }
  return status;
}

struct AgentOptions {
  int port = agent::kDefaultAgentPort;
  std::string address = "0.0.0.0";
  std::string community = "public";
  std::vector<std::string> extra;
  std::string mib_path;
  std::string descr;
  std::string contact;
  std::string location;
};

int cmd_agent(const AgentOptions& o, std::ostream& out, std::ostream& err) {
  stop_flag() = false;
  try {
    mib::Registry registry;
    load_registry(registry, o.mib_path);
    agent::AgentConfig config;
    config.address = o.address;
    config.port = static_cast<std::uint16_t>(o.port);
    config.community = o.community;
    agent::Agent a(config);
    agent::SystemInfo info;
    info.descr = o.descr;
    info.contact = o.contact;
    info.location = o.location;
    agent::install_system_group(a.tree(), registry, a.context(), info);
    if (registry.has_module("LISP-MIB")) agent::install_enterprise_mib(a.tree(), registry, a.context());
    for (const auto& file : o.extra) {
      std::ifstream in(file, std::ios::binary);
      if (!in) throw Error(file + ": cannot read");
      mib::CompiledMibModule module = mib::read_compiled(in);
      mib::load_compiled(registry, module);
      auto n = agent::install_module_scalars(a.tree(), registry, module);
      out << "loaded " << module.header.name << " (" << n << " scalars)\n";
    }
    agent::Service service(a);
    out << "snmpkit agent listening on " << service.address() << std::endl;
    while (!stop_flag()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    service.stop();
    out << "stopped\n";
    return kOk;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kSnmpError;
  }
}

}  // namespace

std::atomic<bool>& stop_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SNMP manager, agent and MIB compiler", "snmpkit"};
  app.require_subcommand(1);

  ClientOptions copts;
  std::string host;
  std::vector<std::string> oids;
  std::vector<std::string> set_args;
  std::string table_name;
  bool count_exchanges = false;
  std::string table_format = "table";
  int non_repeaters = 0;
  int max_repetitions = 10;
  std::vector<std::string> mibc_inputs;
  std::string mibc_out = ".";
  AgentOptions aopts;

  auto* get = app.add_subcommand("get", "GetRequest for one or more OIDs");
  auto* getnext = app.add_subcommand("getnext", "GetNextRequest for one or more OIDs");
  auto* walk = app.add_subcommand("walk", "Walk a subtree");
  auto* set = app.add_subcommand("set", "SetRequest: OID TYPE VALUE triples");
  auto* bulk = app.add_subcommand("bulk", "GetBulkRequest");
  auto* table = app.add_subcommand("table", "Retrieve a conceptual table");
  for (auto* cmd : {get, getnext, walk, set, bulk, table}) {
    add_client_options(cmd, copts);
    cmd->add_option("host", host, "host[:port]")->required();
  }
  get->add_option("oids", oids, "Object identifiers")->required();
  getnext->add_option("oids", oids, "Object identifiers")->required();
  walk->add_option("oid", oids, "Subtree root (default mib-2)")->expected(0, 1);
  set->add_option("bindings", set_args, "OID TYPE VALUE ...")->required();
  bulk->add_option("oids", oids, "Object identifiers")->required();
  bulk->add_option("-N,--non-repeaters", non_repeaters, "Non-repeaters")->check(CLI::NonNegativeNumber);
  bulk->add_option("-R,--max-repetitions", max_repetitions, "Max-repetitions")->check(CLI::NonNegativeNumber);
  table->add_option("table", table_name, "Table name, e.g. ifTable")->required();
  table->add_flag("--count-exchanges", count_exchanges, "Print the number of request/response exchanges");
  table->add_option("-O,--format", table_format, "table or plain")->check(CLI::IsMember({"table", "plain"}));

  auto* mibc = app.add_subcommand("mibc", "Compile SMI modules");
  mibc->add_option("inputs", mibc_inputs, "SMI source files")->required();
  mibc->add_option("-o,--output", mibc_out, "Output directory");

  auto* agent_cmd = app.add_subcommand("agent", "Run an SNMPv1/v2c agent until interrupted");
  agent_cmd->add_option("-p,--port", aopts.port, "UDP port")->check(CLI::Range(0, 65535));
  agent_cmd->add_option("--address", aopts.address, "Bind address");
  agent_cmd->add_option("-c,--community", aopts.community, "Community string");
  agent_cmd->add_option("--mib", aopts.extra, "Extra compiled module to expose");
  agent_cmd->add_option("-M,--mib-path", aopts.mib_path, "Directories of compiled MIBs, ':'-separated");
  agent_cmd->add_option("--descr", aopts.descr, "sysDescr value");
  agent_cmd->add_option("--contact", aopts.contact, "sysContact value");
  agent_cmd->add_option("--location", aopts.location, "sysLocation value");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
      err << "Run 'snmpkit " << sub->get_name() << " --help' for usage.\n";
    return kUsage;
  }

  if (get->parsed()) {
    return client_command(copts, host, out, err, [&](Session& s, const mib::Registry& reg, std::ostream& o) {
      std::vector<BindingSpec> specs(oids.begin(), oids.end());
      print_bindings(o, s.request(PduType::get_request, specs), reg);
    });
  }
  if (getnext->parsed()) {
    return client_command(copts, host, out, err, [&](Session& s, const mib::Registry& reg, std::ostream& o) {
      std::vector<BindingSpec> specs(oids.begin(), oids.end());
      print_bindings(o, s.get_next(specs), reg);
    });
  }
  if (walk->parsed()) {
    return client_command(copts, host, out, err, [&](Session& s, const mib::Registry& reg, std::ostream& o) {
      auto result = s.walk(oids.empty() ? mib::OidSpec("mib-2") : mib::OidSpec(oids.front()));
      if (result.empty()) o << (oids.empty() ? "mib-2" : oids.front()) << " = No Such Object available on this agent at this OID\n";
      print_bindings(o, result, reg);
    });
  }
  if (set->parsed()) {
    return client_command(copts, host, out, err, [&](Session& s, const mib::Registry& reg, std::ostream& o) {
      if (set_args.size() % 3 != 0) throw UsageError("set expects OID TYPE VALUE triples");
      std::vector<BindingSpec> specs;
      for (std::size_t i = 0; i < set_args.size(); i += 3) {
        if (set_args[i + 1].size() != 1) throw UsageError("bad value type: " + set_args[i + 1]);
        specs.emplace_back(mib::OidSpec(set_args[i]), parse_typed_value(set_args[i + 1][0], set_args[i + 2], reg));
      }
      print_bindings(o, s.set(specs), reg);
    });
  }
  if (bulk->parsed()) {
    return client_command(copts, host, out, err, [&](Session& s, const mib::Registry& reg, std::ostream& o) {
      std::vector<BindingSpec> specs(oids.begin(), oids.end());
      print_bindings(o, s.bulk(non_repeaters, max_repetitions, specs), reg);
    });
  }
  if (table->parsed()) {
    return client_command(copts, host, out, err, [&](Session& s, const mib::Registry& reg, std::ostream& o) {
      auto schema = mib::table_schema(reg, table_name);
      auto rows = s.select(table_name);
      if (table_format == "plain") {
        for (const auto& row : rows) print_bindings(o, row.plain_value(), reg);
      } else {
        print_table(o, rows, schema, reg);
      }
      if (count_exchanges) o << "exchanges: " << s.exchanges() << '\n';
    });
  }
  if (mibc->parsed()) return cmd_mibc(mibc_inputs, mibc_out, out, err);
  if (agent_cmd->parsed()) return cmd_agent(aopts, out, err);
  return kUsage;
}

}  // namespace snmp::cli
