#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "navisense/clients.hpp"

namespace navisense::intent {

struct FindObject {
  std::string query;
  std::vector<std::string> attributes;

  /// Query handed to the detector: the object name followed by any
  /// attribute phrases.
  std::string detection_query() const;

  friend bool operator==(const FindObject&, const FindObject&) = default;
};

struct Clarify {
  std::string question;
  friend bool operator==(const Clarify&, const Clarify&) = default;
};

struct Chat {
  std::string reply;
  friend bool operator==(const Chat&, const Chat&) = default;
};

using Intent = std::variant<FindObject, Clarify, Chat>;

std::string to_string(const Intent& intent);

enum class Speaker { kUser, kSystem };

struct DialogueTurn {
  Speaker speaker = Speaker::kUser;
  std::string text;
};

struct NeedPhrase {
  std::string phrase;    // matched case-insensitively as a substring
  std::string question;  // clarifying question to ask
};

struct IntentConfig {
  bool strip_possessive = true;
  std::vector<NeedPhrase> need_phrases = {
      {"i'm thirsty", "Would you like me to find a water bottle or a soft drink?"},
      {"i am thirsty", "Would you like me to find a water bottle or a soft drink?"},
  };
  std::string help_reply =
      "I can help you find objects. Try saying: find my coffee cup.";
};

class IntentResolver {
 public:
  virtual ~IntentResolver() = default;
  virtual Intent resolve(std::string_view utterance, const std::vector<DialogueTurn>& history) = 0;
};

/// Ordered pattern rules: find / looking for / where is, then configured
/// need phrases, then a help reply.
class MockIntentResolver final : public IntentResolver {
 public:
  explicit MockIntentResolver(IntentConfig config = {}) : config_(std::move(config)) {}
  Intent resolve(std::string_view utterance, const std::vector<DialogueTurn>& history) override;

 private:
  IntentConfig config_;
};

/// Builds the instruction document, sends it through the LLM client, and
/// parses the line grammar. ClientError propagates to the caller.
class RemoteIntentResolver final : public IntentResolver {
 public:
  explicit RemoteIntentResolver(clients::LLMClient& client) : client_(client) {}
  Intent resolve(std::string_view utterance, const std::vector<DialogueTurn>& history) override;

 private:
  clients::LLMClient& client_;
};

/// Validates the utterance (non-empty after trimming; throws
/// Error(kInvalidUtterance)) and the history (speakers alternate; throws
/// Error(kInvalidInput)), then delegates to `resolver`.
Intent resolve_intent(std::string_view utterance, const std::vector<DialogueTurn>& history,
                      IntentResolver& resolver);

Intent remote_resolve(std::string_view utterance, const std::vector<DialogueTurn>& history,
                      clients::LLMClient& client);

std::string build_instruction_document(std::string_view utterance,
                                       const std::vector<DialogueTurn>& history);

/// Reply grammar, one field per line:
///   INTENT: find|clarify|chat
///   QUERY: <object>           (find)
///   ATTRIBUTES: a, b          (find, optional)
///   QUESTION: <text>          (clarify)
///   REPLY: <text>             (chat)
/// Anything that does not fit degrades to Chat carrying the raw reply.
Intent parse_intent_reply(std::string_view reply, bool strip_possessive = true);

/// Lowercases, trims, drops trailing punctuation and leading articles; with
/// `strip_possessive` also drops "my"/"our"/"your" prefixes.
std::string normalize_query(std::string_view text, bool strip_possessive = true);

}  // namespace navisense::intent
