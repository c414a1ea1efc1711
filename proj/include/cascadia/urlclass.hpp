#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cascadia/ingest.hpp"

namespace cascadia {

enum class UrlClass { Whitelist, Light, Critical, Benign };

const char* url_class_name(UrlClass c);
std::optional<UrlClass> url_class_from_name(const std::string& name);

struct UrlLabel {
  UrlClass cls = UrlClass::Benign;
  std::string category;  // set iff cls is Light or Critical

  bool operator==(const UrlLabel&) const = default;
};

// Lowercase host suffix -> category, plus the category's severity class.
struct BlacklistIndex {
  std::map<std::string, std::string> host_to_category;
  std::map<std::string, UrlClass> category_to_class;  // Light or Critical only
};

// Fixed severity taxonomy. Categories outside it map to Benign and are
// dropped when loading a blacklist directory.
std::optional<UrlClass> category_severity(const std::string& category);

// Directory tree with one subdirectory per category, each holding a file
// named "domains": one host per line, '#' comments, blank lines ignored.
BlacklistIndex load_blacklist_dir(const std::string& dir);

// Flat file, one host suffix per line, same comment rules.
std::vector<std::string> load_whitelist_file(const std::string& path);

// Every maximal substring starting with http:// or https://, ended by
// whitespace or a closing delimiter ()]}>"'), trailing .,;:!? stripped.
std::vector<std::string> extract_urls(const std::string& text);

// Lowercased authority with userinfo, port, and a leading "www." removed;
// path, query, and fragment dropped. Throws on an empty authority.
std::string normalize_host(const std::string& url);

// normalize_host that reports unusable URLs instead of throwing.
std::optional<std::string> try_normalize_host(const std::string& url);

// Precedence: whitelist suffix match, then longest blacklist suffix (host,
// then each parent domain), then Benign.
UrlLabel classify_url(const std::string& host,
                      const std::vector<std::string>& whitelist,
                      const BlacklistIndex& index);

enum class ThreadValue { Target, NonTarget };
enum class WorstClass { None, Light, Critical };

struct ThreadLabel {
  ThreadValue value = ThreadValue::NonTarget;
  WorstClass worst = WorstClass::None;

  bool operator==(const ThreadLabel&) const = default;
};

// Worst severity over every URL in the thread's comments and replies;
// Target iff any URL is Light or Critical. Unusable URLs are skipped.
ThreadLabel label_thread(const PostThread& thread,
                         const std::vector<std::string>& whitelist,
                         const BlacklistIndex& index);

// Worst label among one comment's URLs with Critical > Light > Benign.
// Empty when the text has no usable URLs or only whitelisted ones.
std::optional<UrlLabel> classify_comment(const std::string& text,
                                         const std::vector<std::string>& whitelist,
                                         const BlacklistIndex& index);

}  // namespace cascadia
