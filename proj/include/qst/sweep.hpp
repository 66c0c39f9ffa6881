#pragma once

// Result records and their CSV/JSON serialization, plus a small
// deterministic parallel map for sweep points.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace qst {

using FieldValue = std::variant<std::int64_t, double, std::string>;

/// One (parameters -> metric) row. Fields keep insertion order so every
/// record of an experiment shares one column layout.
struct Record {
  std::vector<std::pair<std::string, FieldValue>> fields;

  Record& set(const std::string& key, FieldValue v) {
    for (auto& [k, val] : fields)
      if (k == key) {
        val = std::move(v);
        return *this;
      }
    fields.emplace_back(key, std::move(v));
    return *this;
  }

  const FieldValue* find(const std::string& key) const {
    for (const auto& [k, v] : fields)
      if (k == key) return &v;
    return nullptr;
  }

  double number(const std::string& key) const {
    const FieldValue* v = find(key);
    if (!v) throw std::out_of_range("Record: no field '" + key + "'");
    if (std::holds_alternative<double>(*v)) return std::get<double>(*v);
    if (std::holds_alternative<std::int64_t>(*v))
      return static_cast<double>(std::get<std::int64_t>(*v));
    throw std::invalid_argument("Record: field '" + key + "' is not numeric");
  }
};

inline std::string format_field(const FieldValue& v) {
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  if (std::holds_alternative<std::int64_t>(v)) return std::to_string(std::get<std::int64_t>(v));
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", std::get<double>(v));
  return buf;
}

inline void write_csv(std::ostream& os, const std::vector<Record>& records,
                      bool with_timestamp = true) {
  if (with_timestamp) {
    const std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    os << "# generated " << buf << "\n";
  }
  if (records.empty()) return;
  for (std::size_t i = 0; i < records.front().fields.size(); ++i)
    os << (i ? "," : "") << records.front().fields[i].first;
  os << "\n";
  for (const Record& r : records) {
    for (std::size_t i = 0; i < r.fields.size(); ++i)
      os << (i ? "," : "") << format_field(r.fields[i].second);
    os << "\n";
  }
}

inline nlohmann::json to_json(const std::vector<Record>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Record& r : records) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [k, v] : r.fields) {
      if (std::holds_alternative<std::int64_t>(v))
        obj[k] = std::get<std::int64_t>(v);
      else if (std::holds_alternative<double>(v))
        obj[k] = std::get<double>(v);
      else
        obj[k] = std::get<std::string>(v);
    }
    arr.push_back(std::move(obj));
  }
  return arr;
}

inline std::vector<Record> records_from_json(const nlohmann::json& arr) {
  std::vector<Record> out;
  for (const auto& obj : arr) {
    Record r;
    for (const auto& [k, v] : obj.items()) {
      if (v.is_number_integer())
        r.set(k, v.get<std::int64_t>());
      else if (v.is_number())
        r.set(k, v.get<double>());
      else
        r.set(k, v.get<std::string>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_json(std::ostream& os, const std::vector<Record>& records) {
  os << to_json(records).dump(2) << "\n";
}

/// Run fn(i) for i in [0, n) on up to `jobs` threads. Each index is an
/// isolated deterministic task; the caller indexes results by i, so the
/// output order does not depend on scheduling.
inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

class StopWatch {
public:
  StopWatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace qst
