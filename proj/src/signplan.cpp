#include "sanvaad/signplan.hpp"

#include <fstream>
#include <sstream>

#include "sanvaad/error.hpp"
#include "text_util.hpp"

namespace sanvaad {

using nlohmann::json;

namespace {

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 0x21 && u <= 0x2F) || (u >= 0x3A && u <= 0x40) || (u >= 0x5B && u <= 0x60) || (u >= 0x7B && u <= 0x7E);
}

std::string join(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::size_t utf8_length(unsigned char lead) {
  if (lead >= 0xF0) return 4;
  if (lead >= 0xE0) return 3;
  if (lead >= 0xC0) return 2;
  return 1;
}

void spell_token(const std::string& token, SignPlan& plan, bool strict) {
  for (std::size_t i = 0; i < token.size();) {
    const char c = token[i];
    if (c >= 'a' && c <= 'z') {
      plan.items.push_back(LetterItem{static_cast<char>(c - 'a' + 'A'), kLetterSeconds, token});
      ++i;
    } else if (c >= '1' && c <= '9') {
      plan.items.push_back(LetterItem{c, kLetterSeconds, token});
      ++i;
    } else {
      const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(c)), token.size() - i);
      if (strict) {
        plan.warnings.push_back("no sign for character '" + token.substr(i, len) + "' in token '" + token + "'");
      }
      i += len;
    }
  }
}

}  // namespace

std::vector<std::string> tokenize_text(std::string_view raw) {
  std::string cleaned;
  cleaned.reserve(raw.size());
  for (char c : raw) {
    if (is_ascii_punct(c)) continue;
    cleaned += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return detail::split_whitespace(cleaned);
}

const std::vector<std::string>& PhraseDictionary::default_stop_keywords() {
  static const std::vector<std::string> words{"goodbye", "stop"};
  return words;
}

PhraseDictionary::PhraseDictionary() { set_stop_keywords(default_stop_keywords()); }

std::vector<std::string> PhraseDictionary::canonicalize(std::vector<std::string> tokens) const {
  if (synonyms_.empty()) return tokens;
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (auto& t : tokens) {
    auto it = synonyms_.find(t);
    if (it == synonyms_.end()) {
      out.push_back(std::move(t));
    } else {
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  return out;
}

std::vector<std::string> PhraseDictionary::normalize(std::string_view raw) const {
  return canonicalize(tokenize_text(raw));
}

void PhraseDictionary::add_phrase(std::string_view phrase, std::string asset_id) {
  const auto tokens = normalize(phrase);
  if (tokens.empty()) throw Error(ErrorCode::invalid_argument, "phrase '" + std::string(phrase) + "' is empty after normalization");
  if (detail::trim(asset_id).empty()) {
    throw Error(ErrorCode::invalid_argument, "phrase '" + std::string(phrase) + "' has an empty asset id");
  }
  for (const auto& t : tokens) {
    if (stop_.contains(t)) {
      throw Error(ErrorCode::invalid_argument,
                  "phrase '" + std::string(phrase) + "' contains stop keyword '" + t + "'");
    }
  }
  std::string key = join(tokens, 0, tokens.size());
  if (phrases_.contains(key)) throw Error(ErrorCode::duplicate_phrase, "duplicate phrase '" + key + "'");
  longest_ = std::max(longest_, tokens.size());
  order_.push_back(key);
  phrases_.emplace(std::move(key), std::move(asset_id));
}

void PhraseDictionary::add_synonym(std::string_view token, std::string_view canonical) {
  const auto from = tokenize_text(token);
  if (from.size() != 1) {
    throw Error(ErrorCode::invalid_argument, "synonym key '" + std::string(token) + "' must be a single word");
  }
  auto to = tokenize_text(canonical);
  if (to.empty()) throw Error(ErrorCode::invalid_argument, "synonym for '" + from[0] + "' is empty");
  synonyms_[from[0]] = std::move(to);
}

void PhraseDictionary::set_stop_keywords(const std::vector<std::string>& keywords) {
  stop_.clear();
  for (const auto& k : keywords) {
    for (auto& t : tokenize_text(k)) stop_.insert(std::move(t));
  }
}

const std::string* PhraseDictionary::find(std::string_view normalized_phrase) const {
  auto it = phrases_.find(std::string(normalized_phrase));
  return it == phrases_.end() ? nullptr : &it->second;
}

bool PhraseDictionary::is_stop_keyword(std::string_view token) const { return stop_.contains(std::string(token)); }

PhraseDictionary dictionary_from_json(const json& manifest) {
  if (!manifest.is_object()) throw Error(ErrorCode::parse, "dictionary manifest must be a JSON object");
  PhraseDictionary dict;
  try {
    if (manifest.contains("stop_keywords")) {
      dict.set_stop_keywords(manifest.at("stop_keywords").get<std::vector<std::string>>());
    }
    if (manifest.contains("synonyms")) {
      for (const auto& [k, v] : manifest.at("synonyms").items()) dict.add_synonym(k, v.get<std::string>());
    }
    if (!manifest.contains("phrases")) throw Error(ErrorCode::parse, "dictionary manifest has no 'phrases' object");
    for (const auto& [k, v] : manifest.at("phrases").items()) dict.add_phrase(k, v.get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("dictionary manifest: ") + e.what());
  }
  return dict;
}

PhraseDictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open dictionary " + path.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, path.string() + ": " + e.what());
  }
  try {
    return dictionary_from_json(manifest);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::string> normalize_text(std::string_view raw, const PhraseDictionary& dict) {
  return dict.normalize(raw);
}

std::size_t SignPlan::gif_count() const {
  std::size_t n = 0;
  for (const auto& item : items) n += std::holds_alternative<GifItem>(item) ? 1 : 0;
  return n;
}

std::size_t SignPlan::letter_count() const { return items.size() - gif_count(); }

double SignPlan::letter_seconds() const {
  double s = 0.0;
  for (const auto& item : items) {
    if (const auto* l = std::get_if<LetterItem>(&item)) s += l->duration;
  }
  return s;
}

SignPlan translate(std::string_view raw, const PhraseDictionary& dict, const TranslateOptions& options) {
  SignPlan plan;
  std::vector<std::string> tokens = dict.normalize(raw);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (dict.is_stop_keyword(tokens[i])) {
      tokens.resize(i);
      plan.terminal = true;
      break;
    }
  }

  std::size_t i = 0;
  while (i < tokens.size()) {
    const std::size_t max_len = std::min(dict.longest_phrase(), tokens.size() - i);
    bool matched = false;
    for (std::size_t len = max_len; len >= 1; --len) {
      std::string key = join(tokens, i, i + len);
      if (const std::string* asset = dict.find(key)) {
        plan.items.push_back(GifItem{*asset, std::move(key)});
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      spell_token(tokens[i], plan, options.strict);
      ++i;
    }
  }
  plan.tokens = std::move(tokens);
  return plan;
}

json plan_to_json(const SignPlan& plan) {
  json items = json::array();
  for (const auto& item : plan.items) {
    if (const auto* g = std::get_if<GifItem>(&item)) {
      items.push_back({{"type", "gif"}, {"asset_id", g->asset_id}, {"phrase", g->source_phrase}});
    } else {
      const auto& l = std::get<LetterItem>(item);
      items.push_back({{"type", "letter"},
                       {"symbol", std::string(1, l.symbol)},
                       {"duration", l.duration},
                       {"token", l.source_token}});
    }
  }
  return {{"items", items}, {"terminal", plan.terminal}, {"tokens", plan.tokens}, {"warnings", plan.warnings}};
}

}  // namespace sanvaad
