#pragma once

// Deterministic discrete-event simulation of Central-Authority key management
// on top of the Blom scheme.
//
// Endpoint 0 is the CA; sensor nodes are 1..N. Every message takes exactly one
// tick. Handshakes:
//   admission       JoinRequest -> JoinChallenge(nonce) -> JoinResponse(tag)
//   identity        IdAssign -> IdAck (before any matrix exists)
//   key request     KeyRequest(peer) -> KeyReply to both parties
//   authentication  AuthQuery from both parties -> AuthVerdict to both
//   detection       Probe(nonce) -> ProbeReply(tag), every probe_interval ticks
// A node failing a probe (or sending traffic after being flagged) is marked
// malicious: relabeled MN<m>, counted in the intrusion table, cut off from all
// traffic, announced by MaliciousNotice to every trusted node, and the secret
// matrix is rotated.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "blomkit/blom.hpp"

namespace blomkit::net {

using Tick = std::uint64_t;
using Endpoint = std::size_t;
inline constexpr Endpoint kCa = 0;

enum class MessageKind {
  JoinRequest,
  JoinChallenge,
  JoinResponse,
  IdAssign,
  IdAck,
  KeyRequest,
  KeyReply,
  AuthQuery,
  AuthVerdict,
  Probe,
  ProbeReply,
  MaliciousNotice,
  Data,
};

std::string to_string(MessageKind kind);

/// Keyed tag binding a credential to a nonce. Stands in for whatever the
/// node's home network used to authenticate it.
std::uint64_t credential_tag(std::uint64_t credential, std::uint64_t nonce);
/// Public identifier under which a credential is presented.
std::uint64_t credential_id(std::uint64_t credential);

// --- event log -------------------------------------------------------------

struct LogRecord {
  Tick time = 0;
  std::string kind;
  std::string src;
  std::string dst;
  std::vector<std::pair<std::string, std::string>> attrs;

  std::optional<std::string> attr(const std::string& key) const;
  std::string detail() const;
  std::string line() const;
};

class EventLog {
 public:
  void append(LogRecord record);
  const std::vector<LogRecord>& records() const { return records_; }

  /// One record per line: "time kind src dst detail".
  std::string text() const;
  static EventLog parse(const std::string& text);

 private:
  std::vector<LogRecord> records_;
};

// --- protocol state --------------------------------------------------------

struct NodeLabel {
  bool malicious = false;
  std::size_t ordinal = 0;  // m in "MN<m>"

  std::string text(Endpoint index) const;
};

/// Malicious label -> intrusion count, in marking order.
class IntrusionTable {
 public:
  /// Returns the count after the increment.
  std::uint64_t record(const std::string& label);
  std::uint64_t count(const std::string& label) const;
  std::uint64_t total() const;
  const std::vector<std::pair<std::string, std::uint64_t>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::uint64_t>> entries_;
};

enum class AdmitResult { Admitted, Rejected };

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The trusted authority. Also usable directly, without the event loop.
class CentralAuthority {
 public:
  CentralAuthority(blom::SchemeParams params, std::set<std::uint64_t> trusted_credentials,
                   std::uint64_t seed);

  // Admission.
  std::uint64_t issue_challenge(Endpoint node);
  /// Rejects unknown credentials, wrong tags, stale or replayed nonces, and a
  /// credential already used by another node.
  AdmitResult verify_join(Endpoint node, std::uint64_t nonce, std::uint64_t tag,
                          std::uint64_t credential_id);
  bool admitted(Endpoint node) const { return admitted_.count(node) != 0; }

  // Identity.
  void record_id_ack(Endpoint node);
  bool ids_assigned() const;
  const std::set<Endpoint>& registry() const { return registry_; }

  // Scheme setup; throws ProtocolError if identifiers are not all acknowledged.
  void setup_scheme(std::uint64_t seed);
  void setup_scheme(gf::Matrix pub, gf::Matrix secret);
  bool has_scheme() const { return scheme_.has_value(); }
  const blom::SchemeState& scheme() const;

  /// Secret override applied when rotating into a given epoch.
  void set_epoch_override(std::uint64_t epoch, gf::Matrix secret);
  void set_rekey_rule(blom::UpdateRule rule) { rule_ = std::move(rule); }

  /// Rotates S; returns the new epoch.
  std::uint64_t rekey();

  // Key distribution.
  bool pending_rekey() const { return pending_rekey_; }
  void mark_pair_completed() { pending_rekey_ = true; }
  /// Applies a pending rekey; returns true if it rotated.
  bool consume_pending_rekey();

  // Malicious-node handling.
  bool is_malicious(Endpoint node) const;
  NodeLabel label(Endpoint node) const;
  bool path_blocked(Endpoint a, Endpoint b) const;
  const std::set<std::pair<Endpoint, Endpoint>>& blocked_paths() const { return blocked_; }
  const IntrusionTable& intrusion_table() const { return table_; }

  struct MarkOutcome {
    std::string label;
    std::uint64_t count;
    bool first_offense;
    std::uint64_t epoch;
  };
  /// Relabels (first offense only), counts, blocks and rotates S.
  MarkOutcome mark_malicious(Endpoint node);

  /// Verdict for a pair wishing to talk.
  bool authorize(Endpoint a, Endpoint b) const;

  std::uint64_t issue_probe_nonce(Endpoint node);
  bool check_probe_reply(Endpoint node, std::uint64_t nonce, std::uint64_t tag) const;

  std::uint64_t rekeys() const { return rekeys_; }

 private:
  blom::SchemeParams params_;
  std::map<std::uint64_t, std::uint64_t> trusted_by_id_;
  std::uint64_t seed_;
  Rng rng_;

  std::map<Endpoint, std::uint64_t> outstanding_nonce_;
  std::map<Endpoint, std::uint64_t> probe_nonce_;
  std::set<std::uint64_t> used_nonces_;
  std::set<Endpoint> admitted_;
  std::map<Endpoint, std::uint64_t> credentials_;
  std::set<Endpoint> registry_;

  std::optional<blom::SchemeState> scheme_;
  std::map<std::uint64_t, gf::Matrix> overrides_;
  blom::UpdateRule rule_ = blom::rule::ReversalProduct{};
  bool pending_rekey_ = false;
  std::uint64_t rekeys_ = 0;

  std::map<Endpoint, NodeLabel> labels_;
  std::size_t next_ordinal_ = 1;
  IntrusionTable table_;
  std::set<std::pair<Endpoint, Endpoint>> blocked_;
};

struct SensorNode {
  Endpoint slot = 0;
  std::string name;
  std::uint64_t credential = 0;
  std::optional<Endpoint> id;
  std::optional<blom::PrivateRow> private_row;
  std::map<Endpoint, blom::PublicColumn> known_public;
  std::set<Endpoint> allowed_peers;
  std::optional<Tick> adversarial_since;
};

// --- scenarios -------------------------------------------------------------

struct TimedPair {
  Endpoint i = 0;
  Endpoint j = 0;
  Tick time = 0;
};

struct Adversary {
  Endpoint node = 0;
  Tick time = 0;
};

struct ScenarioConfig {
  std::uint64_t q = 31;
  unsigned t = 3;
  std::size_t node_count = 4;
  blom::Variant variant = blom::Variant::Modified;
  Tick probe_interval = 5;
  std::uint64_t seed = 1;
  std::string rekey_rule = "reversal";
  std::vector<std::string> names;

  std::optional<std::vector<std::vector<std::int64_t>>> fixture_public;
  std::optional<std::vector<std::vector<std::int64_t>>> fixture_secret;
  std::map<std::uint64_t, std::vector<std::vector<std::int64_t>>> epoch_secrets;

  std::vector<Adversary> adversaries;
  std::vector<TimedPair> requests;
  std::vector<TimedPair> sessions;  // attempts using cached key material only
  std::vector<TimedPair> data;
  std::vector<Endpoint> forged;     // nodes presenting a credential the CA does not trust
  std::vector<std::string> bootstrap_order{"admit", "assign_ids", "setup"};
  Tick end_time = 0;                // 0 = one probe interval after the last scripted event
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses the JSON scenario document; errors name the offending field.
ScenarioConfig parse_scenario(const std::string& text);

struct Metrics {
  std::uint64_t sessions_established = 0;
  std::uint64_t session_failures = 0;
  std::uint64_t detections = 0;
  std::uint64_t rekeys = 0;
  std::uint64_t refused_requests = 0;
  std::uint64_t blocked_messages = 0;
  std::uint64_t dropped_data = 0;
  std::uint64_t final_epoch = 0;

  std::string csv() const;
};

struct Detection {
  Endpoint node;
  Tick probe_round;
  Tick detected_at;
};

struct ScenarioResult {
  EventLog log;
  Metrics metrics;
  std::vector<Detection> detections;
  std::vector<std::pair<std::string, std::uint64_t>> intrusion_table;
  std::vector<std::string> violations;  // failed in-run invariant checks
};

/// Runs the whole scenario. Identical (config, seed) give identical logs.
ScenarioResult run_scenario(const ScenarioConfig& config);

/// Replays a log and reports broken protocol invariants (empty = clean).
std::vector<std::string> check_log_invariants(const EventLog& log);

}  // namespace blomkit::net
