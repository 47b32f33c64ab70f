#include "blomkit/netsim.hpp"

#include <algorithm>
#include <queue>
#include <tuple>
#include <sstream>
#include <variant>

#include <json.hpp>

namespace blomkit::net {

namespace {

constexpr std::uint64_t kCredentialStream = 11;
constexpr std::uint64_t kForgedStream = 12;
constexpr std::uint64_t kCaStream = 13;
constexpr std::uint64_t kAdversaryStream = 14;

std::string endpoint_name(Endpoint e) { return e == kCa ? "CA" : std::to_string(e); }

std::string residues(const std::vector<gf::Residue>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out + "]";
}

}  // namespace

std::string to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::JoinRequest: return "JoinRequest";
    case MessageKind::JoinChallenge: return "JoinChallenge";
    case MessageKind::JoinResponse: return "JoinResponse";
    case MessageKind::IdAssign: return "IdAssign";
    case MessageKind::IdAck: return "IdAck";
    case MessageKind::KeyRequest: return "KeyRequest";
    case MessageKind::KeyReply: return "KeyReply";
    case MessageKind::AuthQuery: return "AuthQuery";
    case MessageKind::AuthVerdict: return "AuthVerdict";
    case MessageKind::Probe: return "Probe";
    case MessageKind::ProbeReply: return "ProbeReply";
    case MessageKind::MaliciousNotice: return "MaliciousNotice";
    case MessageKind::Data: return "Data";
  }
  return "Unknown";
}

std::uint64_t credential_tag(std::uint64_t credential, std::uint64_t nonce) {
  return derive_seed(credential, nonce, 0x7461675f);
}

std::uint64_t credential_id(std::uint64_t credential) {
  return derive_seed(credential, 0x69645f);
}

// --- log -------------------------------------------------------------------

std::optional<std::string> LogRecord::attr(const std::string& key) const {
  for (const auto& [k, v] : attrs) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string LogRecord::detail() const {
  std::string out;
  for (const auto& [k, v] : attrs) {
    if (!out.empty()) out += ' ';
    out += k + '=' + v;
  }
  return out.empty() ? "-" : out;
}

std::string LogRecord::line() const {
  return std::to_string(time) + ' ' + kind + ' ' + src + ' ' + dst + ' ' + detail();
}

void EventLog::append(LogRecord record) { records_.push_back(std::move(record)); }

std::string EventLog::text() const {
  std::string out;
  for (const auto& r : records_) out += r.line() + '\n';
  return out;
}

EventLog EventLog::parse(const std::string& text) {
  EventLog log;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    LogRecord r;
    if (!(fields >> r.time >> r.kind >> r.src >> r.dst)) {
      throw std::invalid_argument("malformed log line: " + line);
    }
    std::string token;
    while (fields >> token) {
      if (token == "-") continue;
      const auto eq = token.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("malformed attribute: " + token);
      r.attrs.emplace_back(token.substr(0, eq), token.substr(eq + 1));
    }
    log.append(std::move(r));
  }
  return log;
}

// --- intrusion table -------------------------------------------------------

std::string NodeLabel::text(Endpoint index) const {
  return malicious ? "MN" + std::to_string(ordinal) : std::to_string(index);
}

std::uint64_t IntrusionTable::record(const std::string& label) {
  for (auto& [l, c] : entries_) {
    if (l == label) return ++c;
  }
  entries_.emplace_back(label, 1);
  return 1;
}

std::uint64_t IntrusionTable::count(const std::string& label) const {
  for (const auto& [l, c] : entries_) {
    if (l == label) return c;
  }
  return 0;
}

std::uint64_t IntrusionTable::total() const {
  std::uint64_t sum = 0;
  for (const auto& e : entries_) sum += e.second;
  return sum;
}

// --- central authority -----------------------------------------------------

CentralAuthority::CentralAuthority(blom::SchemeParams params,
                                   std::set<std::uint64_t> trusted_credentials,
                                   std::uint64_t seed)
    : params_(params), seed_(seed), rng_(derive_seed(seed, kCaStream)) {
  params_.validate();
  for (auto c : trusted_credentials) trusted_by_id_[credential_id(c)] = c;
}

std::uint64_t CentralAuthority::issue_challenge(Endpoint node) {
  std::uint64_t nonce = rng_.next();
  while (used_nonces_.count(nonce)) nonce = rng_.next();
  outstanding_nonce_[node] = nonce;
  return nonce;
}

AdmitResult CentralAuthority::verify_join(Endpoint node, std::uint64_t nonce,
                                          std::uint64_t tag, std::uint64_t cred_id) {
  if (used_nonces_.count(nonce)) return AdmitResult::Rejected;
  const auto it = outstanding_nonce_.find(node);
  if (it == outstanding_nonce_.end() || it->second != nonce) return AdmitResult::Rejected;
  used_nonces_.insert(nonce);
  outstanding_nonce_.erase(it);

  const auto trusted = trusted_by_id_.find(cred_id);
  if (trusted == trusted_by_id_.end()) return AdmitResult::Rejected;
  if (credential_tag(trusted->second, nonce) != tag) return AdmitResult::Rejected;
  for (const auto& [other, cred] : credentials_) {
    if (cred == trusted->second && other != node) return AdmitResult::Rejected;
  }
  admitted_.insert(node);
  credentials_[node] = trusted->second;
  return AdmitResult::Admitted;
}

void CentralAuthority::record_id_ack(Endpoint node) {
  if (!admitted(node)) {
    throw ProtocolError("IdAck from node " + std::to_string(node) + " which was not admitted");
  }
  registry_.insert(node);
}

bool CentralAuthority::ids_assigned() const {
  return !admitted_.empty() && registry_ == admitted_;
}

void CentralAuthority::setup_scheme(std::uint64_t seed) {
  if (!ids_assigned()) {
    throw ProtocolError("unique ids must be assigned before the matrices are computed");
  }
  scheme_ = blom::make_scheme(params_, seed);
}

void CentralAuthority::setup_scheme(gf::Matrix pub, gf::Matrix secret) {
  if (!ids_assigned()) {
    throw ProtocolError("unique ids must be assigned before the matrices are computed");
  }
  scheme_ = blom::make_scheme(params_, std::move(pub), std::move(secret));
}

const blom::SchemeState& CentralAuthority::scheme() const {
  if (!scheme_) throw ProtocolError("scheme not set up yet");
  return *scheme_;
}

void CentralAuthority::set_epoch_override(std::uint64_t epoch, gf::Matrix secret) {
  if (!gf::is_symmetric(secret)) {
    throw std::invalid_argument("epoch " + std::to_string(epoch) +
                                " override is not symmetric");
  }
  overrides_.insert_or_assign(epoch, std::move(secret));
}

std::uint64_t CentralAuthority::rekey() {
  const auto& current = scheme();
  const auto next = current.epoch + 1;
  if (const auto it = overrides_.find(next); it != overrides_.end()) {
    scheme_ = blom::rekey_with(current, it->second);
  } else {
    scheme_ = blom::rekey(current, rule_, seed_);
  }
  ++rekeys_;
  return scheme_->epoch;
}

bool CentralAuthority::consume_pending_rekey() {
  if (!pending_rekey_) return false;
  pending_rekey_ = false;
  rekey();
  return true;
}

bool CentralAuthority::is_malicious(Endpoint node) const {
  const auto it = labels_.find(node);
  return it != labels_.end() && it->second.malicious;
}

NodeLabel CentralAuthority::label(Endpoint node) const {
  const auto it = labels_.find(node);
  return it == labels_.end() ? NodeLabel{} : it->second;
}

bool CentralAuthority::path_blocked(Endpoint a, Endpoint b) const {
  return blocked_.count(std::minmax(a, b)) != 0;
}

CentralAuthority::MarkOutcome CentralAuthority::mark_malicious(Endpoint node) {
  if (!registry_.count(node)) {
    throw ProtocolError("cannot mark unregistered node " + std::to_string(node));
  }
  auto& lbl = labels_[node];
  const bool first = !lbl.malicious;
  if (first) {
    lbl = NodeLabel{true, next_ordinal_++};
    // Every path touching the node, the CA link included.
    for (Endpoint other = 0; other <= params_.nodes; ++other) {
      if (other != node) blocked_.insert(std::minmax(node, other));
    }
  }
  const auto text = lbl.text(node);
  const auto count = table_.record(text);
  const auto epoch = rekey();
  return MarkOutcome{text, count, first, epoch};
}

bool CentralAuthority::authorize(Endpoint a, Endpoint b) const {
  return registry_.count(a) && registry_.count(b) && !is_malicious(a) &&
         !is_malicious(b) && !path_blocked(a, b);
}

std::uint64_t CentralAuthority::issue_probe_nonce(Endpoint node) {
  const auto nonce = rng_.next();
  probe_nonce_[node] = nonce;
  return nonce;
}

bool CentralAuthority::check_probe_reply(Endpoint node, std::uint64_t nonce,
                                         std::uint64_t tag) const {
  const auto n = probe_nonce_.find(node);
  const auto c = credentials_.find(node);
  return n != probe_nonce_.end() && n->second == nonce && c != credentials_.end() &&
         credential_tag(c->second, nonce) == tag;
}

// --- scenario parsing ------------------------------------------------------

namespace {

using nlohmann::json;

template <typename T>
T field(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + key + ": required field missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + key + ": " + e.what());
  }
}

template <typename T>
T optional_field(const json& j, const std::string& key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return field<T>(j, key, where);
}

std::vector<TimedPair> parse_pairs(const json& j, const std::string& key, bool required) {
  std::vector<TimedPair> out;
  if (!j.contains(key)) {
    if (required) throw ConfigError(key + ": required field missing");
    return out;
  }
  if (!j.at(key).is_array()) throw ConfigError(key + ": expected a list");
  std::size_t idx = 0;
  for (const auto& e : j.at(key)) {
    const std::string where = key + "[" + std::to_string(idx++) + "].";
    out.push_back({field<Endpoint>(e, "i", where), field<Endpoint>(e, "j", where),
                   field<Tick>(e, "time", where)});
  }
  return out;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");

  ScenarioConfig c;
  c.q = field<std::uint64_t>(j, "q", "");
  c.t = field<unsigned>(j, "t", "");
  c.node_count = field<std::size_t>(j, "node_count", "");
  try {
    c.variant = blom::parse_variant(field<std::string>(j, "variant", ""));
  } catch (const blom::ParamError& e) {
    throw ConfigError(std::string("variant: ") + e.what());
  }
  c.probe_interval = field<Tick>(j, "probe_interval", "");
  c.seed = field<std::uint64_t>(j, "seed", "");
  c.rekey_rule = optional_field<std::string>(j, "rekey_rule", c.rekey_rule, "");
  c.names = optional_field<std::vector<std::string>>(j, "names", {}, "");
  c.end_time = optional_field<Tick>(j, "end_time", 0, "");
  c.forged = optional_field<std::vector<Endpoint>>(j, "forged", {}, "");
  c.bootstrap_order =
      optional_field<std::vector<std::string>>(j, "bootstrap_order", c.bootstrap_order, "");

  if (j.contains("fixture_matrices")) {
    using Rows = std::vector<std::vector<std::int64_t>>;
    const auto& f = j.at("fixture_matrices");
    if (f.contains("P")) c.fixture_public = field<Rows>(f, "P", "fixture_matrices.");
    if (f.contains("S")) c.fixture_secret = field<Rows>(f, "S", "fixture_matrices.");
    if (f.contains("epochs")) {
      for (const auto& [epoch, m] : f.at("epochs").items()) {
        try {
          c.epoch_secrets[std::stoull(epoch)] = m.get<Rows>();
        } catch (const std::exception& e) {
          throw ConfigError("fixture_matrices.epochs." + epoch + ": " + e.what());
        }
      }
    }
  }

  if (!j.contains("adversaries")) throw ConfigError("adversaries: required field missing");
  std::size_t idx = 0;
  for (const auto& e : j.at("adversaries")) {
    const std::string where = "adversaries[" + std::to_string(idx++) + "].";
    c.adversaries.push_back({field<Endpoint>(e, "node", where), field<Tick>(e, "time", where)});
  }
  c.requests = parse_pairs(j, "requests", true);
  c.sessions = parse_pairs(j, "sessions", false);
  c.data = parse_pairs(j, "data", false);
  return c;
}

std::string Metrics::csv() const {
  std::ostringstream os;
  os << "sessions_established,session_failures,detections,rekeys,refused_requests,"
        "blocked_messages,dropped_data,final_epoch\n"
     << sessions_established << ',' << session_failures << ',' << detections << ','
     << rekeys << ',' << refused_requests << ',' << blocked_messages << ','
     << dropped_data << ',' << final_epoch << '\n';
  return os.str();
}

// --- simulator -------------------------------------------------------------

namespace {

struct JoinPayload {
  std::uint64_t nonce = 0;
  std::uint64_t tag = 0;
  std::uint64_t cred_id = 0;
};
struct IdPayload {
  Endpoint index = 0;
};
struct PeerPayload {
  Endpoint peer = 0;
};
struct KeyReplyPayload {
  blom::PrivateRow row;
  blom::PublicColumn peer_col;
  std::uint64_t request = 0;
};
struct VerdictPayload {
  Endpoint peer = 0;
  bool allow = false;
};
struct ProbePayload {
  std::uint64_t nonce = 0;
  std::uint64_t tag = 0;
  Tick round = 0;
};
struct NoticePayload {
  Endpoint node = 0;
  std::string label;
};
struct DataPayload {
  bool authorized = false;
};

using Payload = std::variant<std::monostate, JoinPayload, IdPayload, PeerPayload,
                             KeyReplyPayload, VerdictPayload, ProbePayload, NoticePayload,
                             DataPayload>;

struct Message {
  MessageKind kind;
  Endpoint src;
  Endpoint dst;
  Tick sent;
  Payload payload;
};

struct Deliver {
  Message msg;
};
struct AdversaryOn {
  Endpoint node;
};
struct ProbeTick {};
struct RequestStart {
  Endpoint i, j;
};
struct SessionAttempt {
  Endpoint i, j;
};
struct DataSend {
  Endpoint i, j;
};
struct JoinStart {
  Endpoint node;
};

using Action = std::variant<AdversaryOn, JoinStart, Deliver, ProbeTick, RequestStart,
                            SessionAttempt, DataSend>;

struct Event {
  Tick time;
  std::size_t order;  // action class; earlier classes run first within a tick
  std::uint64_t seq;
  Action action;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.time, a.order, a.seq) > std::tie(b.time, b.order, b.seq);
  }
};

blom::UpdateRule parse_rule(const std::string& name, const blom::SchemeParams& params,
                            std::uint64_t seed) {
  if (name == "reversal") return blom::rule::ReversalProduct{};
  if (name == "self_transpose") return blom::rule::SelfTransposeProduct{};
  if (name == "fresh") return blom::rule::FreshSecret{};
  if (name == "add_symmetric") {
    return blom::rule::AddSymmetric{blom::generate_secret(params, derive_seed(seed, 21))};
  }
  throw ConfigError("rekey_rule: unknown rule '" + name +
                    "' (expected reversal|self_transpose|add_symmetric|fresh)");
}

class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& cfg)
      : cfg_(cfg),
        params_(make_params(cfg)),
        ca_(params_, trusted_credentials(cfg), cfg.seed) {
    ca_.set_rekey_rule(parse_rule(cfg.rekey_rule, params_, cfg.seed));
    for (const auto& [epoch, rows] : cfg.epoch_secrets) {
      ca_.set_epoch_override(epoch, gf::Matrix::from_rows(rows, params_.q));
    }
    nodes_.resize(cfg.node_count + 1);
    Rng forged_rng(derive_seed(cfg.seed, kForgedStream));
    for (Endpoint n = 1; n <= cfg.node_count; ++n) {
      auto& node = nodes_[n];
      node.slot = n;
      node.name = n <= cfg.names.size() ? cfg.names[n - 1] : "node" + std::to_string(n);
      node.credential = node_credential(cfg.seed, n);
      if (std::find(cfg.forged.begin(), cfg.forged.end(), n) != cfg.forged.end()) {
        node.credential = forged_rng.next();
      }
    }
  }

  ScenarioResult run() {
    for (Endpoint n = 1; n <= cfg_.node_count; ++n) schedule(0, JoinStart{n});
    for (const auto& a : cfg_.adversaries) schedule(a.time, AdversaryOn{a.node});
    for (const auto& r : cfg_.requests) schedule(r.time, RequestStart{r.i, r.j});
    for (const auto& s : cfg_.sessions) schedule(s.time, SessionAttempt{s.i, s.j});
    for (const auto& d : cfg_.data) schedule(d.time, DataSend{d.i, d.j});
    end_time_ = cfg_.end_time != 0 ? cfg_.end_time : last_scripted_time() + cfg_.probe_interval;

    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      now_ = ev.time;
      std::visit([this](auto& action) { handle(action); }, ev.action);
    }

    result_.metrics.rekeys = ca_.rekeys();
    result_.metrics.final_epoch = ca_.has_scheme() ? ca_.scheme().epoch : 0;
    result_.intrusion_table = ca_.intrusion_table().entries();
    for (auto& v : check_log_invariants(result_.log)) result_.violations.push_back(std::move(v));
    return std::move(result_);
  }

  static std::uint64_t node_credential(std::uint64_t seed, Endpoint n) {
    return derive_seed(seed, kCredentialStream, n);
  }

 private:
  static blom::SchemeParams make_params(const ScenarioConfig& cfg) {
    try {
      blom::SchemeParams p{cfg.t, gf::PrimeModulus(cfg.q), cfg.node_count, cfg.variant};
      p.validate();
      return p;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("scheme parameters: ") + e.what());
    }
  }

  static std::set<std::uint64_t> trusted_credentials(const ScenarioConfig& cfg) {
    std::set<std::uint64_t> out;
    for (Endpoint n = 1; n <= cfg.node_count; ++n) out.insert(node_credential(cfg.seed, n));
    return out;
  }

  Tick last_scripted_time() const {
    Tick t = 0;
    for (const auto& a : cfg_.adversaries) t = std::max(t, a.time);
    for (const auto& r : cfg_.requests) t = std::max(t, r.time);
    for (const auto& s : cfg_.sessions) t = std::max(t, s.time);
    for (const auto& d : cfg_.data) t = std::max(t, d.time);
    return t;
  }

  template <typename A>
  void schedule(Tick time, A action) {
    Action wrapped{std::move(action)};
    queue_.push(Event{time, wrapped.index(), seq_++, std::move(wrapped)});
  }

  void send(MessageKind kind, Endpoint src, Endpoint dst, Payload payload = {}) {
    schedule(now_ + 1, Deliver{Message{kind, src, dst, now_, std::move(payload)}});
  }

  void log(std::string kind, Endpoint src, Endpoint dst,
           std::vector<std::pair<std::string, std::string>> attrs) {
    result_.log.append(LogRecord{now_, std::move(kind), endpoint_name(src),
                                 endpoint_name(dst), std::move(attrs)});
  }

  void log_event(std::string kind, std::vector<std::pair<std::string, std::string>> attrs) {
    result_.log.append(LogRecord{now_, std::move(kind), "-", "-", std::move(attrs)});
  }

  bool node_trusted(Endpoint n) const {
    return ca_.registry().count(n) && !ca_.is_malicious(n);
  }

  // --- scripted actions ---

  void handle(const JoinStart& a) { send(MessageKind::JoinRequest, a.node, kCa); }

  void handle(const AdversaryOn& a) {
    if (a.node < 1 || a.node > cfg_.node_count) return;
    nodes_[a.node].adversarial_since = now_;
    log_event("Adversary", {{"node", std::to_string(a.node)}});
  }

  void handle(const ProbeTick&) {
    std::vector<Endpoint> targets;
    for (Endpoint n : ca_.registry()) {
      if (!ca_.is_malicious(n)) targets.push_back(n);
    }
    log_event("ProbeRound", {{"round", std::to_string(now_)},
                             {"targets", std::to_string(targets.size())}});
    for (Endpoint n : targets) {
      send(MessageKind::Probe, kCa, n, ProbePayload{ca_.issue_probe_nonce(n), 0, now_});
    }
    if (now_ + cfg_.probe_interval <= end_time_) schedule(now_ + cfg_.probe_interval, ProbeTick{});
  }

  void handle(const RequestStart& r) {
    send(MessageKind::KeyRequest, r.i, kCa, PeerPayload{r.j});
  }

  void handle(const SessionAttempt& s) { establish(s.i, s.j, "scripted"); }

  void handle(const DataSend& d) {
    const bool authorized = d.i <= cfg_.node_count && nodes_[d.i].allowed_peers.count(d.j);
    send(MessageKind::Data, d.i, d.j, DataPayload{authorized});
  }

  // --- message delivery ---

  void handle(const Deliver& d) {
    const auto& m = d.msg;
    std::vector<std::pair<std::string, std::string>> attrs{{"sent", std::to_string(m.sent)}};
    describe_payload(m, attrs);

    if (ca_.is_malicious(m.src) || ca_.is_malicious(m.dst)) {
      attrs.insert(attrs.begin(), {"disp", "blocked"});
      log(to_string(m.kind), m.src, m.dst, std::move(attrs));
      ++result_.metrics.blocked_messages;
      // Traffic originated after the marking counts as a repeat offense.
      if (m.src != kCa && ca_.is_malicious(m.src) && m.sent > marked_at_[m.src]) {
        mark(m.src, "repeat");
      }
      return;
    }
    if (m.kind == MessageKind::Data) {
      const auto& p = std::get<DataPayload>(m.payload);
      if (!p.authorized) {
        attrs.insert(attrs.begin(), {"disp", "dropped"});
        attrs.emplace_back("reason", "no_auth");
        log("Data", m.src, m.dst, std::move(attrs));
        ++result_.metrics.dropped_data;
        return;
      }
    }
    attrs.insert(attrs.begin(), {"disp", "delivered"});
    log(to_string(m.kind), m.src, m.dst, std::move(attrs));
    dispatch(m);
  }

  void describe_payload(const Message& m, std::vector<std::pair<std::string, std::string>>& a) {
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, IdPayload>) {
            a.emplace_back("id", std::to_string(p.index));
            if (m.kind == MessageKind::IdAssign) a.emplace_back("name", nodes_[p.index].name);
          } else if constexpr (std::is_same_v<P, PeerPayload>) {
            a.emplace_back("peer", std::to_string(p.peer));
          } else if constexpr (std::is_same_v<P, KeyReplyPayload>) {
            a.emplace_back("peer", std::to_string(p.peer_col.owner + 1));
            a.emplace_back("epoch", std::to_string(p.row.epoch));
            a.emplace_back("row", residues(p.row.row));
            a.emplace_back("col", residues(p.peer_col.col));
          } else if constexpr (std::is_same_v<P, VerdictPayload>) {
            a.emplace_back("peer", std::to_string(p.peer));
            a.emplace_back("verdict", p.allow ? "allow" : "deny");
          } else if constexpr (std::is_same_v<P, ProbePayload>) {
            a.emplace_back("round", std::to_string(p.round));
          } else if constexpr (std::is_same_v<P, NoticePayload>) {
            a.emplace_back("subject", std::to_string(p.node));
            a.emplace_back("label", p.label);
          }
        },
        m.payload);
  }

  void dispatch(const Message& m) {
    switch (m.kind) {
      case MessageKind::JoinRequest: {
        send(MessageKind::JoinChallenge, kCa, m.src, JoinPayload{ca_.issue_challenge(m.src)});
        break;
      }
      case MessageKind::JoinChallenge: {
        const auto& node = nodes_[m.dst];
        const auto nonce = std::get<JoinPayload>(m.payload).nonce;
        send(MessageKind::JoinResponse, m.dst, kCa,
             JoinPayload{nonce, credential_tag(node.credential, nonce),
                         credential_id(node.credential)});
        break;
      }
      case MessageKind::JoinResponse: on_join_response(m); break;
      case MessageKind::IdAssign: {
        const auto id = std::get<IdPayload>(m.payload).index;
        nodes_[m.dst].id = id;
        send(MessageKind::IdAck, m.dst, kCa, IdPayload{id});
        break;
      }
      case MessageKind::IdAck: on_id_ack(m); break;
      case MessageKind::KeyRequest: on_key_request(m.src, std::get<PeerPayload>(m.payload).peer); break;
      case MessageKind::KeyReply: on_key_reply(m); break;
      case MessageKind::AuthQuery: on_auth_query(m); break;
      case MessageKind::AuthVerdict: {
        const auto& v = std::get<VerdictPayload>(m.payload);
        auto& peers = nodes_[m.dst].allowed_peers;
        if (v.allow) {
          peers.insert(v.peer);
        } else {
          peers.erase(v.peer);
        }
        break;
      }
      case MessageKind::Probe: {
        const auto& node = nodes_[m.dst];
        auto p = std::get<ProbePayload>(m.payload);
        const bool adversarial = node.adversarial_since && *node.adversarial_since <= now_;
        p.tag = adversarial ? credential_tag(derive_seed(cfg_.seed, kAdversaryStream, m.dst), p.nonce)
                            : credential_tag(node.credential, p.nonce);
        send(MessageKind::ProbeReply, m.dst, kCa, p);
        break;
      }
      case MessageKind::ProbeReply: {
        const auto& p = std::get<ProbePayload>(m.payload);
        if (!ca_.check_probe_reply(m.src, p.nonce, p.tag)) {
          result_.detections.push_back({m.src, p.round, now_});
          ++result_.metrics.detections;
          log_event("Detect", {{"node", std::to_string(m.src)}, {"round", std::to_string(p.round)}});
          mark(m.src, "probe");
        }
        break;
      }
      case MessageKind::MaliciousNotice: {
        const auto& p = std::get<NoticePayload>(m.payload);
        nodes_[m.dst].allowed_peers.erase(p.node);
        nodes_[m.dst].known_public.erase(p.node);
        break;
      }
      case MessageKind::Data: break;
    }
  }

  void on_join_response(const Message& m) {
    const auto& p = std::get<JoinPayload>(m.payload);
    const auto result = ca_.verify_join(m.src, p.nonce, p.tag, p.cred_id);
    const bool ok = result == AdmitResult::Admitted;
    log_event(ok ? "Admitted" : "Rejected", {{"node", std::to_string(m.src)}});
    if (++joins_resolved_ < cfg_.node_count) return;

    // All joins resolved: hand out identifiers.
    for (Endpoint n = 1; n <= cfg_.node_count; ++n) {
      if (ca_.admitted(n)) send(MessageKind::IdAssign, kCa, n, IdPayload{n});
    }
  }

  void on_id_ack(const Message& m) {
    ca_.record_id_ack(m.src);
    if (!ca_.ids_assigned()) return;
    log_event("IdsAssigned", {{"count", std::to_string(ca_.registry().size())}});
    setup();
  }

  void setup() {
    if (cfg_.fixture_public || cfg_.fixture_secret) {
      if (!cfg_.fixture_public || !cfg_.fixture_secret) {
        throw ConfigError("fixture_matrices: P and S must be given together");
      }
      ca_.setup_scheme(gf::Matrix::from_rows(*cfg_.fixture_public, params_.q),
                       gf::Matrix::from_rows(*cfg_.fixture_secret, params_.q));
    } else {
      ca_.setup_scheme(cfg_.seed);
    }
    const auto& s = ca_.scheme();
    const auto report = blom::verify_t_security_structure(s.pub, params_.t, 200000, 2000, cfg_.seed);
    log_event("Setup", {{"epoch", std::to_string(s.epoch)},
                        {"variant", blom::to_string(params_.variant)},
                        {"t", std::to_string(params_.t)},
                        {"q", std::to_string(params_.q.value())},
                        {"tsecure", report.pass ? "pass" : "fail"}});
    const Tick first_probe = (now_ / cfg_.probe_interval + 1) * cfg_.probe_interval;
    if (first_probe <= end_time_) schedule(first_probe, ProbeTick{});
    auto deferred = std::move(deferred_requests_);
    for (const auto& [i, j] : deferred) on_key_request(i, j);
  }

  void refuse(Endpoint i, Endpoint j, const std::string& reason) {
    ++result_.metrics.refused_requests;
    log("KeyRefused", kCa, i, {{"peer", std::to_string(j)}, {"reason", reason}});
  }

  void on_key_request(Endpoint i, Endpoint j) {
    if (!ca_.has_scheme()) {
      deferred_requests_.emplace_back(i, j);
      return;
    }
    if (!ca_.registry().count(i)) return refuse(i, j, "unregistered");
    if (j == i || !ca_.registry().count(j)) return refuse(i, j, "unknown_peer");
    if (ca_.is_malicious(j)) return refuse(i, j, "peer_malicious");
    if (ca_.path_blocked(i, j)) return refuse(i, j, "blocked");

    if (ca_.consume_pending_rekey()) {
      log_event("Rekey", {{"epoch", std::to_string(ca_.scheme().epoch)}, {"reason", "request"}});
    }
    const auto& s = ca_.scheme();
    const auto id = next_request_++;
    pairs_[id] = PairProgress{i, j, 0};
    send(MessageKind::KeyReply, kCa, i,
         KeyReplyPayload{s.private_row(i - 1), s.public_column(j - 1), id});
    send(MessageKind::KeyReply, kCa, j,
         KeyReplyPayload{s.private_row(j - 1), s.public_column(i - 1), id});
  }

  void on_key_reply(const Message& m) {
    const auto& p = std::get<KeyReplyPayload>(m.payload);
    auto& node = nodes_[m.dst];
    node.private_row = p.row;
    node.known_public[p.peer_col.owner + 1] = p.peer_col;
    auto& progress = pairs_[p.request];
    if (++progress.delivered < 2) return;
    // The secret rotates before the next request is served.
    ca_.mark_pair_completed();
    log_event("PairComplete", {{"i", std::to_string(progress.i)},
                               {"j", std::to_string(progress.j)},
                               {"epoch", std::to_string(p.row.epoch)}});
    establish(progress.i, progress.j, "request");
  }

  void establish(Endpoint i, Endpoint j, const std::string& trigger) {
    auto fail = [&](std::vector<std::pair<std::string, std::string>> attrs) {
      ++result_.metrics.session_failures;
      attrs.insert(attrs.begin(), {"trigger", trigger});
      log("SessionFail", i, j, std::move(attrs));
    };
    if (i < 1 || j < 1 || i > cfg_.node_count || j > cfg_.node_count || i == j) {
      return fail({{"reason", "bad_pair"}});
    }
    const auto& a = nodes_[i];
    const auto& b = nodes_[j];
    if (!a.private_row || !b.private_row || !a.known_public.count(j) || !b.known_public.count(i)) {
      return fail({{"reason", "missing_material"}});
    }
    const auto key_i = blom::shared_key(*a.private_row, a.known_public.at(j), params_.q);
    const auto key_j = blom::shared_key(*b.private_row, b.known_public.at(i), params_.q);
    if (a.private_row->epoch != b.private_row->epoch) {
      return fail({{"reason", "stale_epoch"},
                   {"epoch_i", std::to_string(a.private_row->epoch)},
                   {"epoch_j", std::to_string(b.private_row->epoch)},
                   {"key_i", std::to_string(key_i.value)},
                   {"key_j", std::to_string(key_j.value)}});
    }
    std::vector<std::pair<std::string, std::string>> attrs{
        {"trigger", trigger},
        {"epoch", std::to_string(key_i.epoch)},
        {"key_i", std::to_string(key_i.value)},
        {"key_j", std::to_string(key_j.value)},
        {"names", nodes_[i].name + "/" + nodes_[j].name}};
    if (key_i.weak()) attrs.emplace_back("weak", "1");
    if (key_i.value != key_j.value) {
      result_.violations.push_back("same-epoch keys disagree for pair " + std::to_string(i) +
                                   "/" + std::to_string(j));
      attrs.insert(attrs.begin(), {"reason", "key_mismatch"});
      ++result_.metrics.session_failures;
      log("SessionFail", i, j, std::move(attrs));
      return;
    }
    ++result_.metrics.sessions_established;
    log("Session", i, j, std::move(attrs));
    send(MessageKind::AuthQuery, i, kCa, PeerPayload{j});
    send(MessageKind::AuthQuery, j, kCa, PeerPayload{i});
  }

  void on_auth_query(const Message& m) {
    const auto peer = std::get<PeerPayload>(m.payload).peer;
    const auto key = std::minmax(m.src, peer);
    auto& waiting = auth_waiting_[key];
    waiting.insert(m.src);
    if (!waiting.count(peer)) return;
    auth_waiting_.erase(key);
    const bool allow = ca_.authorize(m.src, peer);
    log_event("Verdict", {{"i", std::to_string(key.first)},
                          {"j", std::to_string(key.second)},
                          {"verdict", allow ? "allow" : "deny"}});
    send(MessageKind::AuthVerdict, kCa, key.first, VerdictPayload{key.second, allow});
    send(MessageKind::AuthVerdict, kCa, key.second, VerdictPayload{key.first, allow});
  }

  void mark(Endpoint node, const std::string& cause) {
    const auto outcome = ca_.mark_malicious(node);
    log_event("Mark", {{"node", std::to_string(node)},
                       {"label", outcome.label},
                       {"count", std::to_string(outcome.count)},
                       {"first", outcome.first_offense ? "1" : "0"},
                       {"cause", cause}});
    if (outcome.first_offense) {
      marked_at_[node] = now_;
      for (Endpoint n : ca_.registry()) {
        if (n != node && !ca_.is_malicious(n)) {
          send(MessageKind::MaliciousNotice, kCa, n, NoticePayload{node, outcome.label});
        }
      }
    }
    log_event("Rekey", {{"epoch", std::to_string(outcome.epoch)}, {"reason", "intrusion"}});
  }

  struct PairProgress {
    Endpoint i;
    Endpoint j;
    int delivered;
  };

  const ScenarioConfig& cfg_;
  blom::SchemeParams params_;
  CentralAuthority ca_;
  std::vector<SensorNode> nodes_;
  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  std::uint64_t seq_ = 0;
  Tick now_ = 0;
  Tick end_time_ = 0;
  std::size_t joins_resolved_ = 0;
  std::uint64_t next_request_ = 1;
  std::map<std::uint64_t, PairProgress> pairs_;
  std::vector<std::pair<Endpoint, Endpoint>> deferred_requests_;
  std::map<std::pair<Endpoint, Endpoint>, std::set<Endpoint>> auth_waiting_;
  std::map<Endpoint, Tick> marked_at_;
  ScenarioResult result_;
};

void validate(const ScenarioConfig& c) {
  if (c.node_count < 2) throw ConfigError("node_count: need at least 2 nodes");
  if (c.probe_interval == 0) throw ConfigError("probe_interval: must be positive");
  const std::vector<std::string> expected{"admit", "assign_ids", "setup"};
  auto pos = [&](const std::string& phase) {
    const auto it = std::find(c.bootstrap_order.begin(), c.bootstrap_order.end(), phase);
    if (it == c.bootstrap_order.end()) throw ConfigError("bootstrap_order: missing phase '" + phase + "'");
    return it - c.bootstrap_order.begin();
  };
  if (c.bootstrap_order.size() != expected.size()) {
    throw ConfigError("bootstrap_order: expected the phases admit, assign_ids, setup");
  }
  if (pos("admit") > pos("assign_ids")) {
    throw ConfigError("bootstrap_order: nodes must be admitted before ids are assigned");
  }
  if (pos("setup") < pos("assign_ids")) {
    throw ConfigError("bootstrap_order: ids must be assigned before the matrices are computed");
  }
  auto check_node = [&](Endpoint n, const std::string& where) {
    if (n < 1 || n > c.node_count) {
      throw ConfigError(where + ": node " + std::to_string(n) + " outside 1.." +
                        std::to_string(c.node_count));
    }
  };
  for (std::size_t k = 0; k < c.adversaries.size(); ++k) {
    check_node(c.adversaries[k].node, "adversaries[" + std::to_string(k) + "].node");
  }
  auto check_pairs = [&](const std::vector<TimedPair>& v, const std::string& key) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::string where = key + "[" + std::to_string(k) + "]";
      check_node(v[k].i, where + ".i");
      check_node(v[k].j, where + ".j");
      if (v[k].i == v[k].j) throw ConfigError(where + ": i and j must differ");
    }
  };
  check_pairs(c.requests, "requests");
  check_pairs(c.sessions, "sessions");
  check_pairs(c.data, "data");
  for (std::size_t k = 0; k < c.forged.size(); ++k) {
    check_node(c.forged[k], "forged[" + std::to_string(k) + "]");
  }
  if (!c.names.empty() && c.names.size() != c.node_count) {
    throw ConfigError("names: expected " + std::to_string(c.node_count) + " entries");
  }
  for (const auto& n : c.names) {
    if (n.empty() || n.find_first_of(" \t\n=/") != std::string::npos) {
      throw ConfigError("names: '" + n + "' must be non-empty without spaces, '=' or '/'");
    }
  }
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
  validate(config);
  Simulator sim(config);
  return sim.run();
}

// --- invariant replay ------------------------------------------------------

std::vector<std::string> check_log_invariants(const EventLog& log) {
  std::vector<std::string> violations;
  Tick last = 0;
  bool setup_seen = false;
  std::set<std::string> registered;
  std::set<std::string> malicious;
  bool pending = false;
  std::uint64_t epoch = 0;

  struct Marking {
    std::string node;
    std::set<std::string> expected;
  };
  std::map<std::string, Marking> markings;  // by label
  std::map<std::pair<std::string, std::string>, int> notices;

  for (const auto& r : log.records()) {
    const auto where = " at t=" + std::to_string(r.time);
    if (r.time < last) violations.push_back("timestamps decrease" + where);
    last = r.time;

    const auto disp = r.attr("disp");
    if (disp && *disp == "delivered" && (malicious.count(r.src) || malicious.count(r.dst))) {
      violations.push_back(r.kind + " delivered to/from malicious node" + where);
    }
    if (r.kind == "IdAck" && disp == "delivered") {
      if (setup_seen) violations.push_back("IdAck after matrices were computed" + where);
      registered.insert(r.src);
    } else if (r.kind == "Setup") {
      setup_seen = true;
      epoch = std::stoull(r.attr("epoch").value_or("0"));
    } else if (r.kind == "Session") {
      if (r.attr("key_i") != r.attr("key_j")) violations.push_back("session keys differ" + where);
    } else if (r.kind == "PairComplete") {
      pending = true;
    } else if (r.kind == "Mark") {
      const auto node = r.attr("node").value_or("?");
      if (r.attr("first") == "1") {
        malicious.insert(node);
        Marking mk{node, {}};
        for (const auto& n : registered) {
          if (!malicious.count(n)) mk.expected.insert(n);
        }
        markings[r.attr("label").value_or("?")] = std::move(mk);
      }
    } else if (r.kind == "MaliciousNotice") {
      ++notices[{r.attr("label").value_or("?"), r.dst}];
    } else if (r.kind == "Rekey") {
      const auto e = std::stoull(r.attr("epoch").value_or("0"));
      if (e != epoch + 1) violations.push_back("epoch did not advance by one" + where);
      epoch = e;
      if (r.attr("reason") == "request") {
        if (!pending) violations.push_back("request rekey without a completed pair" + where);
        pending = false;
      }
    }
  }
  for (const auto& [label, mk] : markings) {
    for (const auto& n : mk.expected) {
      const int got = notices.count({label, n}) ? notices.at({label, n}) : 0;
      if (got != 1) {
        violations.push_back("node " + n + " got " + std::to_string(got) + " notices for " + label);
      }
    }
  }
  return violations;
}

}  // namespace blomkit::net
