#include "cascadia/urlclass.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "cascadia/error.hpp"
#include "cascadia/util.hpp"

namespace cascadia {

namespace fs = std::filesystem;

const char* url_class_name(UrlClass c) {
  switch (c) {
    case UrlClass::Whitelist: return "whitelist";
    case UrlClass::Light: return "light";
    case UrlClass::Critical: return "critical";
    case UrlClass::Benign: return "benign";
  }
  return "benign";
}

std::optional<UrlClass> url_class_from_name(const std::string& name) {
  if (name == "whitelist") return UrlClass::Whitelist;
  if (name == "light") return UrlClass::Light;
  if (name == "critical") return UrlClass::Critical;
  if (name == "benign") return UrlClass::Benign;
  return std::nullopt;
}

std::optional<UrlClass> category_severity(const std::string& category) {
  static const std::vector<std::string> light = {"advertising", "shopping",
                                                 "gamble", "porn"};
  static const std::vector<std::string> critical = {
      "download", "hacking", "spyware", "aggressive",
      "drugs",    "weapons", "violence"};
  if (std::find(light.begin(), light.end(), category) != light.end()) {
    return UrlClass::Light;
  }
  if (std::find(critical.begin(), critical.end(), category) !=
      critical.end()) {
    return UrlClass::Critical;
  }
  return std::nullopt;
}

namespace {

// Shared line rules for both list formats: strip '#' comments, trim, lowercase.
std::vector<std::string> read_host_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open list file: " + path.string());
  std::vector<std::string> hosts;
  std::string line;
  while (std::getline(in, line)) {
    if (auto pos = line.find('#'); pos != std::string::npos) {
      line.erase(pos);
    }
    line = trim(line);
    if (line.empty()) continue;
    hosts.push_back(to_lower(line));
  }
  return hosts;
}

}  // namespace

BlacklistIndex load_blacklist_dir(const std::string& dir) {
  fs::path root(dir);
  if (!fs::is_directory(root)) {
    throw Error("blacklist directory not found: " + dir);
  }
  BlacklistIndex index;
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) subdirs.push_back(entry.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& sub : subdirs) {
    std::string category = to_lower(sub.filename().string());
    auto severity = category_severity(category);
    if (!severity) continue;  // outside the taxonomy, treated as benign
    fs::path domains = sub / "domains";
    if (!fs::is_regular_file(domains)) continue;
    index.category_to_class[category] = *severity;
    for (const auto& host : read_host_lines(domains)) {
      index.host_to_category[host] = category;
    }
  }
  return index;
}

std::vector<std::string> load_whitelist_file(const std::string& path) {
  return read_host_lines(path);
}

std::vector<std::string> extract_urls(const std::string& text) {
  static const std::string kHttp = "http://";
  static const std::string kHttps = "https://";
  auto is_terminator = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ')' ||
           c == ']' || c == '}' || c == '>' || c == '"' || c == '\'';
  };
  std::vector<std::string> urls;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t hit = text.find("http", pos);
    if (hit == std::string::npos) break;
    std::size_t scheme_len = 0;
    if (text.compare(hit, kHttps.size(), kHttps) == 0) {
      scheme_len = kHttps.size();
    } else if (text.compare(hit, kHttp.size(), kHttp) == 0) {
      scheme_len = kHttp.size();
    }
    if (scheme_len == 0) {
      pos = hit + 1;
      continue;
    }
    std::size_t end = hit + scheme_len;
    while (end < text.size() && !is_terminator(text[end])) ++end;
    std::string url = text.substr(hit, end - hit);
    while (!url.empty()) {
      char last = url.back();
      if (last == '.' || last == ',' || last == ';' || last == ':' ||
          last == '!' || last == '?') {
        url.pop_back();
      } else {
        break;
      }
    }
    urls.push_back(std::move(url));
    pos = end;
  }
  return urls;
}

std::optional<std::string> try_normalize_host(const std::string& url) {
  std::string rest;
  if (url.rfind("https://", 0) == 0) {
    rest = url.substr(8);
  } else if (url.rfind("http://", 0) == 0) {
    rest = url.substr(7);
  } else {
    return std::nullopt;
  }
  std::size_t end = rest.find_first_of("/?#");
  std::string authority = rest.substr(0, end);
  if (auto at = authority.rfind('@'); at != std::string::npos) {
    authority.erase(0, at + 1);
  }
  if (auto colon = authority.find(':'); colon != std::string::npos) {
    authority.erase(colon);
  }
  authority = to_lower(authority);
  while (!authority.empty() && authority.back() == '.') authority.pop_back();
  if (authority.rfind("www.", 0) == 0) authority.erase(0, 4);
  if (authority.empty()) return std::nullopt;
  return authority;
}

std::string normalize_host(const std::string& url) {
  auto host = try_normalize_host(url);
  if (!host) throw Error("URL has no usable host: " + url);
  return *host;
}

namespace {

bool suffix_match(const std::string& host, const std::string& entry) {
  if (host == entry) return true;
  return host.size() > entry.size() &&
         host.compare(host.size() - entry.size() - 1, entry.size() + 1,
                      "." + entry) == 0;
}

}  // namespace

UrlLabel classify_url(const std::string& host,
                      const std::vector<std::string>& whitelist,
                      const BlacklistIndex& index) {
  for (const auto& entry : whitelist) {
    if (suffix_match(host, entry)) return {UrlClass::Whitelist, ""};
  }
  // Longest suffix first: the host itself, then each parent domain.
  std::string candidate = host;
  while (!candidate.empty()) {
    auto it = index.host_to_category.find(candidate);
    if (it != index.host_to_category.end()) {
      auto cls = index.category_to_class.find(it->second);
      if (cls != index.category_to_class.end()) {
        return {cls->second, it->second};
      }
    }
    auto dot = candidate.find('.');
    if (dot == std::string::npos) break;
    candidate.erase(0, dot + 1);
  }
  return {UrlClass::Benign, ""};
}

std::optional<UrlLabel> classify_comment(
    const std::string& text, const std::vector<std::string>& whitelist,
    const BlacklistIndex& index) {
  std::optional<UrlLabel> worst;
  auto rank = [](UrlClass c) {
    switch (c) {
      case UrlClass::Critical: return 2;
      case UrlClass::Light: return 1;
      default: return 0;
    }
  };
  for (const auto& url : extract_urls(text)) {
    auto host = try_normalize_host(url);
    if (!host) continue;
    UrlLabel label = classify_url(*host, whitelist, index);
    if (label.cls == UrlClass::Whitelist) continue;
    if (!worst || rank(label.cls) > rank(worst->cls)) worst = label;
  }
  return worst;
}

ThreadLabel label_thread(const PostThread& thread,
                         const std::vector<std::string>& whitelist,
                         const BlacklistIndex& index) {
  ThreadLabel out;
  for (const auto& a : thread.activities) {
    if (!a.has_text() || a.text.empty()) continue;
    auto label = classify_comment(a.text, whitelist, index);
    if (!label) continue;
    if (label->cls == UrlClass::Critical) {
      out.worst = WorstClass::Critical;
      break;
    }
    if (label->cls == UrlClass::Light && out.worst == WorstClass::None) {
      out.worst = WorstClass::Light;
    }
  }
  out.value = out.worst == WorstClass::None ? ThreadValue::NonTarget
                                            : ThreadValue::Target;
  return out;
}

}  // namespace cascadia
