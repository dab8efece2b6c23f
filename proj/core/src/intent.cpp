#include "navisense/intent.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "navisense/error.hpp"
#include "text_util.hpp"

namespace navisense::intent {

namespace {

/// Lowercase with typographic apostrophes folded to ASCII.
std::string canonical(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    // U+2019 RIGHT SINGLE QUOTATION MARK is E2 80 99.
    if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
        static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        static_cast<unsigned char>(text[i + 2]) == 0x99) {
      out.push_back('\'');
      i += 2;
      continue;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
  }
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '\''; }

/// Position of `needle` in `hay` starting on a word boundary, or npos.
std::size_t find_word(std::string_view hay, std::string_view needle) {
  std::size_t pos = hay.find(needle);
  while (pos != std::string_view::npos) {
    if (pos == 0 || !is_word_char(hay[pos - 1])) return pos;
    pos = hay.find(needle, pos + 1);
  }
  return std::string_view::npos;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

constexpr std::array<std::string_view, 10> kFindTriggers = {
    "looking for ", "look for ", "search for ", "find ",      "where is ",
    "where's ",     "where are ", "locate ",    "get me ",    "grab ",
};

constexpr std::array<std::string_view, 3> kConnectors = {" with ", " that ", " which "};

std::vector<std::string> split_attributes(std::string_view tail, bool strip_possessive) {
  std::vector<std::string> out;
  std::string rest(tail);
  for (;;) {
    std::size_t cut = std::string::npos;
    std::size_t len = 0;
    for (std::string_view sep : {std::string_view(" and "), std::string_view(",")}) {
      const std::size_t p = rest.find(sep);
      if (p != std::string::npos && p < cut) {
        cut = p;
        len = sep.size();
      }
    }
    const std::string piece = normalize_query(rest.substr(0, cut), strip_possessive);
    if (!piece.empty()) out.push_back(piece);
    if (cut == std::string::npos) break;
    rest = rest.substr(cut + len);
  }
  return out;
}

std::optional<FindObject> match_find(const std::string& text, bool strip_possessive) {
  std::size_t best = std::string::npos;
  std::size_t best_len = 0;
  for (std::string_view trig : kFindTriggers) {
    const std::size_t p = find_word(text, trig);
    if (p != std::string::npos && (best == std::string::npos || p < best)) {
      best = p;
      best_len = trig.size();
    }
  }
  if (best == std::string::npos) return std::nullopt;
  std::string rest = text.substr(best + best_len);
  if (detail::starts_with(rest, "me ")) rest = rest.substr(3);

  std::size_t cut = std::string::npos;
  std::size_t cut_len = 0;
  for (std::string_view conn : kConnectors) {
    const std::size_t p = rest.find(conn);
    if (p != std::string::npos && p < cut) {
      cut = p;
      cut_len = conn.size();
    }
  }
  FindObject find;
  find.query = normalize_query(rest.substr(0, cut), strip_possessive);
  if (cut != std::string::npos) {
    find.attributes = split_attributes(rest.substr(cut + cut_len), strip_possessive);
  }
  if (find.query.empty()) return std::nullopt;
  return find;
}

}  // namespace

std::string FindObject::detection_query() const {
  if (attributes.empty()) return query;
  return query + " " + join(attributes, " ");
}

std::string to_string(const Intent& intent) {
  struct Visitor {
    std::string operator()(const FindObject& f) const {
      if (f.attributes.empty()) return "FindObject(" + f.query + ")";
      return "FindObject(" + f.query + "; " + join(f.attributes, ", ") + ")";
    }
    std::string operator()(const Clarify& c) const { return "Clarify(" + c.question + ")"; }
    std::string operator()(const Chat& c) const { return "Chat(" + c.reply + ")"; }
  };
  return std::visit(Visitor{}, intent);
}

std::string normalize_query(std::string_view text, bool strip_possessive) {
  std::string s = detail::trim(canonical(text));
  while (!s.empty() && (s.back() == '.' || s.back() == '?' || s.back() == '!' || s.back() == ',' ||
                        s.back() == ';' || s.back() == ':')) {
    s.pop_back();
    s = detail::trim(s);
  }
  std::vector<std::string> tokens;
  for (auto& w : detail::split(s, ' ')) {
    if (!w.empty()) tokens.push_back(w);
  }
  static constexpr std::array<std::string_view, 4> kArticles = {"the", "a", "an", "some"};
  static constexpr std::array<std::string_view, 6> kPossessives = {"my",  "our",   "your",
                                                                   "his", "their", "her"};
  std::size_t first = 0;
  while (first < tokens.size()) {
    const std::string& t = tokens[first];
    const bool article = std::find(kArticles.begin(), kArticles.end(), t) != kArticles.end();
    const bool possessive =
        strip_possessive && std::find(kPossessives.begin(), kPossessives.end(), t) != kPossessives.end();
    if (!article && !possessive) break;
    ++first;
  }
  return join(std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(first), tokens.end()),
              " ");
}

Intent MockIntentResolver::resolve(std::string_view utterance,
                                   const std::vector<DialogueTurn>& /*history*/) {
  const std::string text = detail::trim(canonical(utterance));
  if (auto find = match_find(text, config_.strip_possessive)) return *find;
  for (const auto& need : config_.need_phrases) {
    if (!need.phrase.empty() && find_word(text, canonical(need.phrase)) != std::string::npos) {
      return Clarify{need.question};
    }
  }
  return Chat{config_.help_reply};
}

std::string build_instruction_document(std::string_view utterance,
                                       const std::vector<DialogueTurn>& history) {
  std::string doc =
      "You help a blind or low-vision user find a physical object.\n"
      "Classify the latest utterance and answer with exactly these lines:\n"
      "INTENT: find|clarify|chat\n"
      "QUERY: <object name>              (find only)\n"
      "ATTRIBUTES: <comma separated>     (find only, optional)\n"
      "QUESTION: <clarifying question>   (clarify only)\n"
      "REPLY: <short spoken reply>       (chat only)\n"
      "\nHISTORY:\n";
  for (const auto& turn : history) {
    doc += turn.speaker == Speaker::kUser ? "USER: " : "SYSTEM: ";
    doc += turn.text;
    doc += '\n';
  }
  doc += "\nUTTERANCE: ";
  doc += utterance;
  doc += '\n';
  return doc;
}

Intent parse_intent_reply(std::string_view reply, bool strip_possessive) {
  const Chat fallback{std::string(reply)};
  std::optional<std::string> kind;
  std::optional<std::string> query;
  std::optional<std::string> attributes;
  std::optional<std::string> question;
  std::optional<std::string> chat;

  for (const std::string& raw : detail::split(reply, '\n')) {
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) return fallback;
    const std::string key = detail::lower(detail::trim(line.substr(0, colon)));
    std::string value = detail::trim(line.substr(colon + 1));
    std::optional<std::string>* slot = nullptr;
    if (key == "intent") {
      slot = &kind;
      value = detail::lower(value);
    } else if (key == "query") {
      slot = &query;
    } else if (key == "attributes") {
      slot = &attributes;
    } else if (key == "question") {
      slot = &question;
    } else if (key == "reply") {
      slot = &chat;
    } else {
      return fallback;
    }
    if (slot->has_value()) return fallback;
    *slot = std::move(value);
  }

  if (!kind) return fallback;
  if (*kind == "find") {
    if (!query) return fallback;
    FindObject find;
    find.query = normalize_query(*query, strip_possessive);
    if (find.query.empty()) return fallback;
    if (attributes) find.attributes = split_attributes(canonical(*attributes), strip_possessive);
    return find;
  }
  if (*kind == "clarify" && question && !question->empty()) return Clarify{*question};
  if (*kind == "chat" && chat && !chat->empty()) return Chat{*chat};
  return fallback;
}

Intent RemoteIntentResolver::resolve(std::string_view utterance,
                                     const std::vector<DialogueTurn>& history) {
  const std::string reply = client_.complete(build_instruction_document(utterance, history));
  return parse_intent_reply(reply);
}

Intent resolve_intent(std::string_view utterance, const std::vector<DialogueTurn>& history,
                      IntentResolver& resolver) {
  if (detail::trim(utterance).empty()) {
    throw Error(ErrorCode::kInvalidUtterance, "utterance is empty");
  }
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i].speaker == history[i - 1].speaker) {
      throw Error(ErrorCode::kInvalidInput, "dialogue history must alternate speakers");
    }
  }
  return resolver.resolve(utterance, history);
}

Intent remote_resolve(std::string_view utterance, const std::vector<DialogueTurn>& history,
                      clients::LLMClient& client) {
  RemoteIntentResolver resolver(client);
  return resolve_intent(utterance, history, resolver);
}

}  // namespace navisense::intent
