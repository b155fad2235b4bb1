#pragma once

// In-context extraction with chat-completion models: request building,
// a cached and rate-limited client, and grounding of answers to spans.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "eae/corpus.hpp"
#include "eae/error.hpp"
#include "eae/evaluation.hpp"
#include "eae/hash.hpp"
#include "eae/ontology.hpp"
#include "eae/prompting.hpp"
#include "eae/rng.hpp"

namespace eae::llm {

using json = nlohmann::json;

struct LlmRequest {
  std::string system;
  std::string user;
  std::string model;
  double temperature = 0.0;
  int max_tokens = 256;

  json to_json() const {
    return {{"system", system}, {"user", user}, {"model", model},
            {"temperature", temperature}, {"max_tokens", max_tokens}};
  }
  bool operator==(const LlmRequest&) const = default;
};

// Content hash of everything that determines the response.
inline std::string request_key(const LlmRequest& req) { return sha256_hex(req.to_json().dump()); }

// ---------------------------------------------------------------------------
// Prompts

inline bool supported_variant(PromptVariant v) {
  return v == PromptVariant::kRole || v == PromptVariant::kMRole || v == PromptVariant::kMRoleCeiling;
}

// One (document, event) query; every ontology role of the event is asked.
struct LlmInstance {
  std::string doc_key;
  int event_index = 0;
  bool operator==(const LlmInstance&) const = default;
  auto operator<=>(const LlmInstance&) const = default;
};

// A worked example shown before the query: same layout, gold answer filled in.
struct Demonstration {
  const Document* doc = nullptr;
  const std::vector<EventInstance>* events = nullptr;
  std::size_t event_index = 0;
  std::string role;
};

inline const char* kSystemText =
    "You extract event arguments from a document. For the event and role asked about, quote the "
    "argument exactly as it appears in the document, as a double-quoted substring. Separate several "
    "arguments with \"; \". If the document does not mention the argument, answer none. Reply with a "
    "single line of the form 'role: answer'.";

namespace detail {

inline std::string join_tokens(const std::vector<std::string>& toks) {
  std::string out;
  for (const auto& t : toks) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

inline std::string render_block(const Document& doc, const std::vector<EventInstance>& events,
                                std::size_t event_index, const std::string& role, PromptVariant variant,
                                const Ontology& ontology) {
  PromptRequest req{&doc, &events, event_index, role, variant, TriggerMarking::kInPrompt, nullptr};
  const PromptText prompt = build_prompt(req, ontology);
  const auto& trigger = events.at(event_index).trigger;
  std::ostringstream out;
  out << "Document: " << join_tokens(doc.tokens) << '\n'
      << "Event: " << trigger.event_type << " triggered by '" << doc.surface(trigger.span) << "'\n"
      << "Question: " << prompt.text << '\n'
      << "Answer:";
  return out.str();
}

inline std::string gold_answer(const Document& doc, const EventInstance& event, const std::string& role) {
  std::string out = role + ": ";
  const auto* spans = event.spans_for(role);
  if (spans == nullptr || spans->empty()) return out + "none";
  for (std::size_t i = 0; i < spans->size(); ++i) {
    if (i) out += "; ";
    out += '"' + doc.surface((*spans)[i]) + '"';
  }
  return out;
}

}  // namespace detail

inline LlmRequest build_llm_prompt(PromptVariant variant, const Document& doc,
                                   const std::vector<EventInstance>& events, std::size_t event_index,
                                   const std::string& role, const Ontology& ontology,
                                   const std::vector<Demonstration>& demonstrations = {},
                                   const std::string& model = "") {
  if (!supported_variant(variant)) {
    throw UsageError(std::string("variant '") + variant_name(variant) +
                     "' is not available for LLM extraction (use role, mrole or mrole-ceiling)");
  }
  std::ostringstream user;
  for (std::size_t i = 0; i < demonstrations.size(); ++i) {
    const auto& d = demonstrations[i];
    user << "Example " << i + 1 << ":\n"
         << detail::render_block(*d.doc, *d.events, d.event_index, d.role, variant, ontology) << ' '
         << detail::gold_answer(*d.doc, d.events->at(d.event_index), d.role) << "\n\n";
  }
  if (!demonstrations.empty()) user << "Now answer for this document.\n";
  user << detail::render_block(doc, events, event_index, role, variant, ontology);
  LlmRequest req;
  req.system = kSystemText;
  req.user = user.str();
  req.model = model;
  return req;
}

// ---------------------------------------------------------------------------
// Grounding

struct GroundedAnswer {
  std::string raw;
  std::vector<std::string> strings;
  std::vector<Span> spans;
  std::vector<std::string> ungrounded;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool is_none(const std::string& s) {
  const auto l = lower(trim(s));
  return l.empty() || l == "none" || l == "\"none\"" || l == "none." || l == "n/a";
}

// Argument strings of the line answering `role`; falls back to the first
// non-empty line when no line names the role.
inline std::vector<std::string> parse_answer(const std::string& raw, const std::string& role) {
  std::istringstream in(raw);
  std::string line, chosen;
  bool found = false;
  const std::string key = lower(role) + ":";
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (lower(t).rfind(key, 0) == 0) {
      chosen = t.substr(key.size());
      found = true;
      break;
    }
    if (chosen.empty()) chosen = t;
  }
  if (!found && chosen.find(':') != std::string::npos && chosen.front() != '"') {
    chosen = chosen.substr(chosen.find(':') + 1);
  }
  std::vector<std::string> out;
  if (is_none(chosen)) return out;
  // Quoted substrings when present, otherwise "; "-separated text.
  std::size_t pos = 0;
  while ((pos = chosen.find('"', pos)) != std::string::npos) {
    const auto end = chosen.find('"', pos + 1);
    if (end == std::string::npos) break;
    const std::string s = trim(chosen.substr(pos + 1, end - pos - 1));
    if (!s.empty() && !is_none(s)) out.push_back(s);
    pos = end + 1;
  }
  if (!out.empty()) return out;
  std::size_t start = 0;
  while (start <= chosen.size()) {
    const auto semi = chosen.find(';', start);
    const std::string s = trim(chosen.substr(start, semi == std::string::npos ? std::string::npos : semi - start));
    if (!s.empty() && !is_none(s)) out.push_back(s);
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  return out;
}

inline std::optional<Span> locate(const std::vector<std::string>& needle, const std::vector<std::string>& hay,
                                  bool fold) {
  if (needle.empty() || needle.size() > hay.size()) return std::nullopt;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < needle.size() && ok; ++k) {
      ok = fold ? lower(hay[i + k]) == lower(needle[k]) : hay[i + k] == needle[k];
    }
    if (ok) return Span{static_cast<int>(i), static_cast<int>(i + needle.size() - 1)};
  }
  return std::nullopt;
}

}  // namespace detail

// Exact token-sequence match first, then case-insensitive; earliest wins.
inline GroundedAnswer ground_answer(const std::string& raw, const Document& doc, const std::string& role) {
  GroundedAnswer g;
  g.raw = raw;
  g.strings = detail::parse_answer(raw, role);
  for (const auto& s : g.strings) {
    std::vector<std::string> toks;
    std::istringstream in(s);
    for (std::string t; in >> t;) toks.push_back(t);
    auto hit = detail::locate(toks, doc.tokens, false);
    if (!hit) hit = detail::locate(toks, doc.tokens, true);
    if (hit) {
      if (std::find(g.spans.begin(), g.spans.end(), *hit) == g.spans.end()) g.spans.push_back(*hit);
    } else {
      g.ungrounded.push_back(s);
    }
  }
  std::sort(g.spans.begin(), g.spans.end());
  return g;
}

// ---------------------------------------------------------------------------
// Subset sampling

inline std::vector<LlmInstance> all_instances(const CorpusSplit& split) {
  std::vector<LlmInstance> out;
  for (const auto& d : split.documents) {
    const int n = static_cast<int>(split.events_of(d.doc_key).size());
    for (int i = 0; i < n; ++i) out.push_back(LlmInstance{d.doc_key, i});
  }
  return out;
}

// Seeded sample without replacement of (document, event) instances.
inline std::vector<LlmInstance> sample_subset(const CorpusSplit& split, std::size_t n, std::uint64_t seed) {
  auto all = all_instances(split);
  if (n > all.size()) {
    throw UsageError("cannot sample " + std::to_string(n) + " instances from a split with " +
                     std::to_string(all.size()) + " events");
  }
  Rng rng(seed);
  rng.shuffle(all);
  all.resize(n);
  return all;
}

inline void write_subset(const std::filesystem::path& path, const std::vector<LlmInstance>& ids) {
  json j = json::array();
  for (const auto& i : ids) j.push_back({{"doc_key", i.doc_key}, {"event_index", i.event_index}});
  std::ofstream out(path);
  if (!out) throw PathError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

inline std::vector<LlmInstance> read_subset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PathError("cannot open '" + path.string() + "'");
  std::vector<LlmInstance> out;
  try {
    for (const auto& e : json::parse(in)) out.push_back({e.at("doc_key").get<std::string>(), e.at("event_index").get<int>()});
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transport

struct TransportResult {
  int status = 0;     // HTTP status; 0 for a connection failure
  std::string text;   // completion text on success
  std::string error;  // provider error message otherwise
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual TransportResult send(const LlmRequest& req) = 0;
};

inline bool is_transient(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

struct Credentials {
  std::string base_url;
  std::string api_key;
};

// EAE_LLM_API_KEY (or OPENAI_API_KEY) and optional EAE_LLM_BASE_URL.
inline Credentials credentials_from_env() {
  Credentials c;
  const char* key = std::getenv("EAE_LLM_API_KEY");
  if (key == nullptr || *key == '\0') key = std::getenv("OPENAI_API_KEY");
  if (key == nullptr || *key == '\0') {
    throw ConfigError("no API key: set EAE_LLM_API_KEY (or OPENAI_API_KEY) for the chat-completion provider");
  }
  c.api_key = key;
  const char* url = std::getenv("EAE_LLM_BASE_URL");
  c.base_url = (url != nullptr && *url != '\0') ? url : "https://api.openai.com";
  return c;
}

// Adapter for OpenAI-compatible /v1/chat/completions endpoints (OpenAI,
// vLLM, Together, and most Llama hosts).
class OpenAiTransport : public ChatTransport {
 public:
  explicit OpenAiTransport(Credentials creds, int timeout_seconds = 120)
      : creds_(std::move(creds)), timeout_(timeout_seconds) {}

  TransportResult send(const LlmRequest& req) override;

  static json body_for(const LlmRequest& req) {
    return {{"model", req.model},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens},
            {"messages", json::array({{{"role", "system"}, {"content", req.system}},
                                      {{"role", "user"}, {"content", req.user}}})}};
  }

  // Completion text, or the provider's error message.
  static TransportResult parse_response(int status, const std::string& body) {
    TransportResult r;
    r.status = status;
    json j;
    try {
      j = json::parse(body);
    } catch (const json::exception&) {
      r.error = body;
      if (status == 200) r.status = 502;  // malformed success is treated as a server fault
      return r;
    }
    if (status == 200) {
      try {
        r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception&) {
        r.status = 502;
        r.error = "response without choices[0].message.content: " + body;
      }
      return r;
    }
    if (j.contains("error") && j["error"].is_object() && j["error"].contains("message")) {
      r.error = j["error"]["message"].get<std::string>();
    } else {
      r.error = body;
    }
    return r;
  }

 private:
  Credentials creds_;
  int timeout_;
};

// ---------------------------------------------------------------------------
// Client

struct RetryPolicy {
  int max_retries = 5;
  double base_delay_s = 1.0;
  double max_delay_s = 60.0;
};

using Sleeper = std::function<void(double seconds)>;

inline Sleeper real_sleeper() {
  return [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
}

// Requests per second with a burst allowance; rate <= 0 disables limiting.
class TokenBucket {
 public:
  using Clock = std::function<double()>;

  TokenBucket(double rate, double burst, Sleeper sleeper, Clock clock = steady_seconds)
      : rate_(rate), burst_(std::max(burst, 1.0)), tokens_(burst_), sleeper_(std::move(sleeper)),
        clock_(std::move(clock)), last_(clock_()) {}

  void acquire() {
    if (rate_ <= 0) return;
    double wait = 0;
    {
      std::lock_guard<std::mutex> lock(mu_);
      const double now = clock_();
      tokens_ = std::min(burst_, tokens_ + (now - last_) * rate_);
      last_ = now;
      tokens_ -= 1.0;
      if (tokens_ < 0) wait = -tokens_ / rate_;
    }
    if (wait > 0) sleeper_(wait);
  }

  static double steady_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
  }

 private:
  double rate_, burst_, tokens_;
  Sleeper sleeper_;
  Clock clock_;
  double last_;
  std::mutex mu_;
};

struct ClientOptions {
  std::filesystem::path cache_dir;  // empty disables caching
  RetryPolicy retry;
  int max_in_flight = 4;
  double requests_per_second = 0.0;
  double burst = 4.0;
};

struct ClientStats {
  long network_calls = 0;
  long cache_hits = 0;
  long retries = 0;
};

class LlmClient {
 public:
  LlmClient(ChatTransport& transport, ClientOptions opts, Sleeper sleeper = real_sleeper())
      : transport_(transport), opts_(std::move(opts)), sleeper_(sleeper),
        bucket_(opts_.requests_per_second, opts_.burst, sleeper),
        slots_(std::max(opts_.max_in_flight, 1)) {
    if (!opts_.cache_dir.empty()) std::filesystem::create_directories(opts_.cache_dir);
  }

  std::string call(const LlmRequest& req) {
    const std::string key = request_key(req);
    if (auto cached = read_cache(key)) {
      ++cache_hits_;
      return *cached;
    }
    slots_.acquire();
    struct Release {
      std::counting_semaphore<1024>& s;
      ~Release() { s.release(); }
    } release{slots_};
    for (int attempt = 0;; ++attempt) {
      bucket_.acquire();
      ++network_calls_;
      const TransportResult r = transport_.send(req);
      if (r.status == 200) {
        write_cache(key, req, r.text);
        return r.text;
      }
      if (!is_transient(r.status)) {
        // Bad model id, bad key, malformed request: surface the provider's words.
        throw ConfigError("provider rejected request (HTTP " + std::to_string(r.status) + "): " + r.error);
      }
      if (attempt >= opts_.retry.max_retries) {
        throw TransportError("giving up after " + std::to_string(attempt + 1) + " attempts (last HTTP " +
                             std::to_string(r.status) + "): " + r.error);
      }
      ++retries_;
      sleeper_(std::min(opts_.retry.max_delay_s, opts_.retry.base_delay_s * static_cast<double>(1L << attempt)));
    }
  }

  // Responses in request order; up to max_in_flight requests run at once.
  std::vector<std::string> call_all(const std::vector<LlmRequest>& reqs) {
    std::vector<std::string> out(reqs.size());
    std::vector<std::exception_ptr> errors(reqs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next++) < reqs.size();) {
        try {
          out[i] = call(reqs[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(opts_.max_in_flight, 1)), reqs.size());
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    return out;
  }

  ClientStats stats() const { return {network_calls_.load(), cache_hits_.load(), retries_.load()}; }

 private:
  std::optional<std::string> read_cache(const std::string& key) const {
    if (opts_.cache_dir.empty()) return std::nullopt;
    std::ifstream in(opts_.cache_dir / (key + ".json"));
    if (!in) return std::nullopt;
    try {
      return json::parse(in).at("response").get<std::string>();
    } catch (const json::exception&) {
      return std::nullopt;  // torn or foreign file: refetch
    }
  }

  void write_cache(const std::string& key, const LlmRequest& req, const std::string& response) {
    if (opts_.cache_dir.empty()) return;
    const auto final_path = opts_.cache_dir / (key + ".json");
    std::ostringstream tid;
    tid << std::this_thread::get_id();
    const auto tmp = opts_.cache_dir / (key + ".tmp." + tid.str());
    {
      std::ofstream out(tmp);
      if (!out) throw PathError("cannot write cache entry '" + tmp.string() + "'");
      out << json{{"request", req.to_json()}, {"response", response}}.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, final_path);
  }

  ChatTransport& transport_;
  ClientOptions opts_;
  Sleeper sleeper_;
  TokenBucket bucket_;
  std::counting_semaphore<1024> slots_;
  std::atomic<long> network_calls_{0}, cache_hits_{0}, retries_{0};
};

// ---------------------------------------------------------------------------
// Runs and report

struct LlmRunResult {
  std::string model;
  PromptVariant variant = PromptVariant::kRole;
  EvalReport report;
  long answer_strings = 0;
  long ungrounded_strings = 0;
  std::vector<PredictionRecord> predictions;
  std::vector<json> transcript;

  double ungrounded_rate() const {
    return answer_strings == 0 ? 0.0 : static_cast<double>(ungrounded_strings) / static_cast<double>(answer_strings);
  }
};

// Queries every ontology role of each sampled event and scores the grounded spans.
inline LlmRunResult run_variant(LlmClient& client, const std::string& model, PromptVariant variant,
                                const CorpusSplit& split, const Ontology& ontology,
                                const std::vector<LlmInstance>& subset,
                                const std::vector<Demonstration>& demonstrations = {}) {
  struct Pending {
    const Document* doc;
    int event;
    std::string role;
  };
  std::vector<Pending> pending;
  std::vector<LlmRequest> reqs;
  for (const auto& inst : subset) {
    const Document* doc = split.find(inst.doc_key);
    const auto& events = split.events_of(inst.doc_key);
    if (doc == nullptr || inst.event_index < 0 || inst.event_index >= static_cast<int>(events.size())) {
      throw IntegrityError("subset references missing event " + inst.doc_key + "#" + std::to_string(inst.event_index));
    }
    const auto& ev = events[static_cast<std::size_t>(inst.event_index)];
    for (const auto& role : ontology.roles_for(ev.trigger.event_type)) {
      reqs.push_back(build_llm_prompt(variant, *doc, events, static_cast<std::size_t>(inst.event_index), role,
                                      ontology, demonstrations, model));
      pending.push_back({doc, inst.event_index, role});
    }
  }
  const auto responses = client.call_all(reqs);
  LlmRunResult res;
  res.model = model;
  res.variant = variant;
  EvalScope scope;
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const auto g = ground_answer(responses[i], *pending[i].doc, pending[i].role);
    res.answer_strings += static_cast<long>(g.strings.size());
    res.ungrounded_strings += static_cast<long>(g.ungrounded.size());
    res.predictions.push_back(PredictionRecord{pending[i].doc->doc_key, pending[i].event, pending[i].role, g.spans,
                                               variant_name(variant), "inprompt"});
    json spans = json::array();
    for (const auto& s : g.spans) spans.push_back({s.start, s.end});
    res.transcript.push_back({{"doc_key", pending[i].doc->doc_key}, {"event_index", pending[i].event},
                              {"role", pending[i].role}, {"request_hash", request_key(reqs[i])},
                              {"raw", g.raw}, {"strings", g.strings}, {"spans", spans},
                              {"ungrounded", g.ungrounded}});
    scope.insert({pending[i].doc->doc_key, pending[i].event});
  }
  for (const auto& inst : subset) scope.insert({inst.doc_key, inst.event_index});
  res.report = evaluate(res.predictions, split, scope);
  return res;
}

inline const char* llm_row_label(PromptVariant v) {
  switch (v) {
    case PromptVariant::kRole: return "Role-prompt";
    case PromptVariant::kMRole: return "mRole-prompt";
    case PromptVariant::kMRoleCeiling: return "mR-prompt (ceiling)";
    default: return variant_label(v);
  }
}

// Model headings with indented variant rows, plus the ungrounded-string rate.
inline GridTable report_llm(const std::vector<LlmRunResult>& runs) {
  std::vector<std::string> models;
  for (const auto& r : runs) {
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
  }
  GridTable table;
  table.data = {{"rows", json::array()}};
  std::vector<std::vector<std::string>> lines = {{"Setting", "P", "R", "F1", "Ungrounded"}};
  for (const auto& m : models) {
    lines.push_back({m, "", "", "", ""});
    for (auto v : {PromptVariant::kRole, PromptVariant::kMRole, PromptVariant::kMRoleCeiling}) {
      for (const auto& r : runs) {
        if (r.model != m || r.variant != v) continue;
        const auto& s = r.report.overall;
        lines.push_back({std::string("      ") + llm_row_label(v), format_pct(s.precision), format_pct(s.recall),
                         format_pct(s.f1), format_pct(r.ungrounded_rate())});
        table.data["rows"].push_back({{"model", m}, {"variant", variant_name(v)}, {"setting", llm_row_label(v)},
                                      {"p", std::round(s.precision * 1000.0) / 10.0},
                                      {"r", std::round(s.recall * 1000.0) / 10.0},
                                      {"f1", std::round(s.f1 * 1000.0) / 10.0},
                                      {"ungrounded_rate", std::round(r.ungrounded_rate() * 1000.0) / 10.0},
                                      {"answer_strings", r.answer_strings},
                                      {"ungrounded_strings", r.ungrounded_strings}});
      }
    }
  }
  std::vector<std::size_t> width(5, 0);
  for (const auto& l : lines) {
    for (std::size_t i = 0; i < l.size(); ++i) width[i] = std::max(width[i], l[i].size());
  }
  std::ostringstream out;
  for (const auto& l : lines) {
    out << l[0] << std::string(width[0] - l[0].size(), ' ');
    for (std::size_t i = 1; i < l.size(); ++i) out << "  " << std::string(width[i] - l[i].size(), ' ') << l[i];
    out << '\n';
  }
  std::string text = out.str();
  // Heading rows carry no numbers; drop their trailing padding.
  std::string cleaned;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    cleaned += line.substr(0, line.find_last_not_of(' ') + 1) + '\n';
  }
  table.text = cleaned;
  return table;
}

}  // namespace eae::llm

// The HTTPS client is only needed by the real transport.
#include <httplib.h>
// <resolv.h> defines _res as a macro, which breaks Eigen headers included later.
#ifdef _res
#undef _res
#endif

namespace eae::llm {

inline TransportResult OpenAiTransport::send(const LlmRequest& req) {
  httplib::Client cli(creds_.base_url);
  cli.set_connection_timeout(timeout_);
  cli.set_read_timeout(timeout_);
  cli.set_bearer_token_auth(creds_.api_key);
  auto res = cli.Post("/v1/chat/completions", body_for(req).dump(), "application/json");
  if (!res) return TransportResult{0, "", "connection failed: " + httplib::to_string(res.error())};
  return parse_response(res->status, res->body);
}

}  // namespace eae::llm
