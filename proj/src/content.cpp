#include "sanvaad/content.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "sanvaad/error.hpp"
#include "text_util.hpp"

namespace sanvaad {

using nlohmann::json;

std::string_view to_string(Language lang) noexcept {
  switch (lang) {
    case Language::english: return "english";
    case Language::hindi: return "hindi";
    case Language::marathi: return "marathi";
  }
  return "english";
}

std::string_view store_file_name(Language lang) noexcept {
  switch (lang) {
    case Language::english: return "eng_news.json";
    case Language::hindi: return "hindi_news.json";
    case Language::marathi: return "marathi_news.json";
  }
  return "eng_news.json";
}

std::optional<Language> match_language(std::string_view text) {
  const std::string key = detail::ascii_lower(detail::trim(text));
  static const std::map<std::string, Language, std::less<>> aliases{
      {"english", Language::english}, {"en", Language::english},      {"eng", Language::english},
      {"hindi", Language::hindi},     {"hi", Language::hindi},        {"hin", Language::hindi},
      {"हिंदी", Language::hindi},      {"हिन्दी", Language::hindi},      {"marathi", Language::marathi},
      {"mr", Language::marathi},      {"mar", Language::marathi},     {"मराठी", Language::marathi},
  };
  auto it = aliases.find(key);
  if (it == aliases.end()) return std::nullopt;
  return it->second;
}

Language resolve_language(std::string_view text) { return match_language(text).value_or(Language::english); }

std::chrono::year_month_day parse_iso_date(std::string_view text) {
  auto fail = [&] { return Error(ErrorCode::parse, "invalid date '" + std::string(text) + "', expected YYYY-MM-DD"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw fail();
  auto digits = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (text[i] < '0' || text[i] > '9') throw fail();
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  const std::chrono::year_month_day date{std::chrono::year{digits(0, 4)},
                                         std::chrono::month{static_cast<unsigned>(digits(5, 2))},
                                         std::chrono::day{static_cast<unsigned>(digits(8, 2))}};
  if (!date.ok()) throw fail();
  return date;
}

std::string format_iso_date(std::chrono::year_month_day date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

NewsStore NewsStore::from_json(const json& doc, const std::string& origin) {
  auto fail = [&](const std::string& what) { return Error(ErrorCode::parse, origin + ": " + what); };
  if (!doc.is_object() || !doc.contains("topics") || !doc.at("topics").is_object()) {
    throw fail("expected an object with a 'topics' object");
  }
  NewsStore store;
  for (const auto& [topic, list] : doc.at("topics").items()) {
    if (!list.is_array()) throw fail("topic '" + topic + "' must hold an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& a = list[i];
      const std::string where = "topic '" + topic + "' article " + std::to_string(i);
      if (!a.is_object()) throw fail(where + " is not an object");
      for (const char* field : {"title", "content", "date"}) {
        if (!a.contains(field) || !a.at(field).is_string()) throw fail(where + " lacks string field '" + field + "'");
      }
      Article article;
      article.title = a.at("title").get<std::string>();
      article.content = a.at("content").get<std::string>();
      if (detail::trim(article.content).empty()) throw fail(where + " has empty content");
      try {
        article.date = parse_iso_date(a.at("date").get<std::string>());
      } catch (const Error& e) {
        throw fail(where + ": " + e.what());
      }
      store.add(topic, std::move(article));
    }
  }
  return store;
}

NewsStore NewsStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open news store " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, path.string() + ": " + e.what());
  }
  return from_json(doc, path.string());
}

void NewsStore::add(std::string_view topic, Article article) {
  topics_[detail::ascii_lower(detail::trim(topic))].push_back(std::move(article));
}

const std::vector<Article>* NewsStore::topic(std::string_view name) const {
  auto it = topics_.find(detail::ascii_lower(detail::trim(name)));
  return it == topics_.end() ? nullptr : &it->second;
}

std::vector<std::string> NewsStore::topics() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : topics_) out.push_back(k);
  return out;
}

std::size_t NewsStore::article_count() const {
  std::size_t n = 0;
  for (const auto& [k, v] : topics_) n += v.size();
  return n;
}

std::vector<Article> select_articles(const NewsStore& store, std::string_view topic, std::size_t limit) {
  const auto* list = store.topic(topic);
  if (list == nullptr) return {};
  std::vector<Article> out = *list;
  std::sort(out.begin(), out.end(), [](const Article& a, const Article& b) {
    if (a.date != b.date) return a.date > b.date;
    if (a.title != b.title) return a.title < b.title;
    return a.content < b.content;
  });
  if (out.size() > limit) out.resize(limit);
  return out;
}

std::string_view to_string(ContentStatus status) noexcept {
  switch (status) {
    case ContentStatus::ok: return "ok";
    case ContentStatus::no_content: return "no_content";
    case ContentStatus::unavailable: return "unavailable";
  }
  return "ok";
}

ContentRequest make_request(std::string_view language, std::string_view topic) {
  return {std::string(language), resolve_language(language), std::string(detail::trim(topic))};
}

NewsLibrary NewsLibrary::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::io, "news store directory " + dir.string() + " not found");
  NewsLibrary lib;
  for (Language lang : kLanguages) {
    const auto path = dir / store_file_name(lang);
    if (std::filesystem::exists(path)) lib.set(lang, NewsStore::load(path));
  }
  return lib;
}

void NewsLibrary::set(Language lang, NewsStore store) { stores_[static_cast<std::size_t>(lang)] = std::move(store); }

const NewsStore* NewsLibrary::store(Language lang) const {
  const auto& s = stores_[static_cast<std::size_t>(lang)];
  return s ? &*s : nullptr;
}

FetchResult fetch_articles(const NewsLibrary& library, const ContentRequest& request) {
  FetchResult result;
  result.served_language = request.language;
  const NewsStore* store = library.store(request.language);
  if (store == nullptr && request.language != Language::english) {
    store = library.store(Language::english);
    result.served_language = Language::english;
    result.language_fallback = true;
  }
  if (store == nullptr) {
    result.status = ContentStatus::unavailable;
    return result;
  }
  result.articles = select_articles(*store, request.topic);
  result.status = result.articles.empty() ? ContentStatus::no_content : ContentStatus::ok;
  return result;
}

std::vector<std::string> split_words(std::string_view text) { return detail::split_whitespace(text); }

std::size_t word_count(std::string_view text) { return split_words(text).size(); }

std::vector<std::string> split_sentences(std::string_view text) {
  static constexpr std::string_view kDanda = "\xE0\xA5\xA4";
  static constexpr std::string_view kDoubleDanda = "\xE0\xA5\xA5";
  auto terminator_at = [&](std::size_t i) -> std::size_t {
    const char c = text[i];
    if (c == '.' || c == '!' || c == '?') return 1;
    const auto rest = text.substr(i);
    if (rest.starts_with(kDanda) || rest.starts_with(kDoubleDanda)) return 3;
    return 0;
  };

  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = terminator_at(i);
    if (len == 0) {
      ++i;
      continue;
    }
    std::size_t end = i + len;
    while (end < text.size()) {
      const std::size_t more = terminator_at(end);
      if (more == 0) break;
      end += more;
    }
    if (end == text.size() || detail::is_ascii_space(text[end])) {
      const auto piece = detail::trim(text.substr(start, end - start));
      if (!piece.empty()) out.emplace_back(piece);
      start = end;
    }
    i = end;
  }
  const auto tail = detail::trim(text.substr(start));
  if (!tail.empty()) out.emplace_back(tail);
  return out;
}

std::string ExtractiveSummarizer::summarize(std::string_view text, std::size_t min_words, std::size_t max_words) const {
  if (min_words > max_words) throw Error(ErrorCode::invalid_argument, "summary bounds are inverted");
  if (word_count(text) < min_words) return std::string(text);

  std::string summary;
  std::size_t words = 0;
  for (const auto& sentence : split_sentences(text)) {
    if (!summary.empty()) summary += ' ';
    summary += sentence;
    words += word_count(sentence);
    if (words >= min_words) break;
  }
  if (words <= max_words) return summary;

  const auto tokens = split_words(summary);
  std::string cut;
  for (std::size_t i = 0; i < max_words; ++i) {
    if (i > 0) cut += ' ';
    cut += tokens[i];
  }
  return cut;
}

std::string summarize(std::string_view text, std::size_t min_words, std::size_t max_words, const Summarizer* summarizer) {
  static const ExtractiveSummarizer fallback;
  return (summarizer != nullptr ? *summarizer : fallback).summarize(text, min_words, max_words);
}

double SpeechPlan::speaking_seconds() const {
  double s = 0.0;
  for (const auto& seg : segments) s += seg.duration_seconds;
  return s;
}

double SpeechPlan::total_seconds() const {
  double s = 0.0;
  for (const auto& seg : segments) s += seg.duration_seconds + seg.pause_after_seconds;
  return s;
}

SpeechPlan build_speech_plan(std::string_view summary, Language language) {
  SpeechPlan plan;
  plan.language = language;
  for (auto& sentence : split_sentences(summary)) {
    SpeechSegment seg;
    seg.words = word_count(sentence);
    seg.duration_seconds = static_cast<double>(seg.words) / kWordsPerMinute * 60.0;
    seg.text = std::move(sentence);
    plan.segments.push_back(std::move(seg));
  }
  return plan;
}

ContentBundle build_bundle(const NewsLibrary& library, const ContentRequest& request, const Summarizer* summarizer) {
  ContentBundle bundle;
  bundle.request = request;
  FetchResult fetched = fetch_articles(library, request);
  bundle.status = fetched.status;
  bundle.served_language = fetched.served_language;
  bundle.language_fallback = fetched.language_fallback;
  for (auto& article : fetched.articles) {
    ContentEntry entry;
    entry.summary = summarize(article.content, kSummaryMinWords, kSummaryMaxWords, summarizer);
    entry.speech = build_speech_plan(entry.summary, fetched.served_language);
    entry.article = std::move(article);
    bundle.entries.push_back(std::move(entry));
  }
  return bundle;
}

json speech_plan_to_json(const SpeechPlan& plan) {
  json segments = json::array();
  for (const auto& s : plan.segments) {
    segments.push_back({{"text", s.text},
                        {"words", s.words},
                        {"duration_seconds", s.duration_seconds},
                        {"pause_after_seconds", s.pause_after_seconds}});
  }
  return {{"language", to_string(plan.language)},
          {"words_per_minute", kWordsPerMinute},
          {"segments", segments},
          {"speaking_seconds", plan.speaking_seconds()},
          {"total_seconds", plan.total_seconds()}};
}

json bundle_to_json(const ContentBundle& bundle) {
  json entries = json::array();
  for (const auto& e : bundle.entries) {
    entries.push_back({{"title", e.article.title},
                       {"date", format_iso_date(e.article.date)},
                       {"content", e.article.content},
                       {"summary", e.summary},
                       {"summary_words", word_count(e.summary)},
                       {"speech", speech_plan_to_json(e.speech)}});
  }
  return {{"request",
           {{"language", bundle.request.raw_language},
            {"resolved_language", to_string(bundle.request.language)},
            {"topic", bundle.request.topic}}},
          {"status", to_string(bundle.status)},
          {"served_language", to_string(bundle.served_language)},
          {"language_fallback", bundle.language_fallback},
          {"entries", entries}};
}

}  // namespace sanvaad
