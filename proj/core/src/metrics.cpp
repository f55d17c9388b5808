#include "sliceq/metrics.hpp"

#include <charconv>
#include <system_error>

#include "sliceq/error.hpp"

namespace sliceq {

std::string format_number(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

RunSummary summarize(std::span<const TimeSeriesRow> series, std::span<const std::int64_t> thresholds) {
  if (series.empty()) {
    throw Error("summarize: empty series");
  }
  const std::size_t n = thresholds.size();
  const std::size_t rows = series.size();
  const double dt = rows >= 2 ? (series.back().t - series.front().t) / static_cast<double>(rows - 1)
                              : series.front().t;
  const double duration = dt * static_cast<double>(rows);

  std::vector<std::size_t> at_rows(n, 0);
  std::vector<QueueTotals> totals(n);
  std::size_t episodes = 0;
  std::size_t converged = 0;
  std::size_t active_rows = 0;

  auto all_bt = [&](const TimeSeriesRow& row) {
    for (std::size_t q = 0; q < n; ++q) {
      if (row.occupancy.at(q) > thresholds[q]) return false;
    }
    return true;
  };

  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = series[i];
    for (std::size_t q = 0; q < n; ++q) {
      if (row.occupancy.at(q) > thresholds[q]) ++at_rows[q];
      totals[q].drops += row.drops.at(q);
      totals[q].occupancy_seconds += static_cast<double>(row.occupancy[q]) * dt;
      if (!row.arrivals.empty()) totals[q].arrivals += row.arrivals.at(q);
      if (!row.departures.empty()) totals[q].departures += row.departures.at(q);
    }
    if (!row.agent_active) continue;
    ++active_rows;
    if (row.attempts == 1) ++episodes;
    const bool last_of_episode =
        i + 1 == rows || !series[i + 1].agent_active || series[i + 1].attempts == 1;
    if (last_of_episode && all_bt(row)) ++converged;
  }

  RunSummary summary;
  summary.queues.resize(n);
  for (std::size_t q = 0; q < n; ++q) {
    summary.queues[q].at_fraction = static_cast<double>(at_rows[q]) / static_cast<double>(rows);
    summary.queues[q].total_drops = totals[q].drops;
    summary.queues[q].measured = measure(totals[q], duration);
  }
  summary.invocations = episodes;
  if (episodes > 0) {
    summary.mean_attempts = static_cast<double>(active_rows) / static_cast<double>(episodes);
    summary.convergence_rate = static_cast<double>(converged) / static_cast<double>(episodes);
  }
  return summary;
}

std::string export_csv(std::span<const TimeSeriesRow> series, std::size_t queue_count) {
  std::string out = "t";
  for (std::size_t q = 0; q < queue_count; ++q) {
    const std::string p = ",q" + std::to_string(q);
    out += p + "_occ" + p + "_rate" + p + "_drops";
  }
  out += ",agent_active,attempts\n";
  for (const auto& row : series) {
    out += format_number(row.t);
    for (std::size_t q = 0; q < queue_count; ++q) {
      out += ',';
      out += std::to_string(row.occupancy.at(q));
      out += ',';
      out += format_number(row.flush_rate.at(q));
      out += ',';
      out += std::to_string(row.drops.at(q));
    }
    out += row.agent_active ? ",1," : ",0,";
    out += std::to_string(row.attempts);
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_field(std::string_view field, std::size_t line_no) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error("csv line " + std::to_string(line_no) + ": bad number '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::vector<TimeSeriesRow> parse_csv(std::string_view text) {
  std::vector<TimeSeriesRow> rows;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    const std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    const auto fields = split(line);
    if (line_no == 1) {
      columns = fields.size();
      if (columns < 3 || (columns - 3) % 3 != 0 || fields.front() != "t") {
        throw Error("csv: unexpected header");
      }
      continue;
    }
    if (fields.size() != columns) {
      throw Error("csv line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                  " columns, got " + std::to_string(fields.size()));
    }
    const std::size_t n = (columns - 3) / 3;
    TimeSeriesRow row;
    row.t = parse_field<double>(fields[0], line_no);
    for (std::size_t q = 0; q < n; ++q) {
      row.occupancy.push_back(parse_field<std::int64_t>(fields[1 + 3 * q], line_no));
      row.flush_rate.push_back(parse_field<double>(fields[2 + 3 * q], line_no));
      row.drops.push_back(parse_field<std::int64_t>(fields[3 + 3 * q], line_no));
    }
    row.agent_active = parse_field<int>(fields[columns - 2], line_no) != 0;
    row.attempts = parse_field<std::int64_t>(fields[columns - 1], line_no);
    rows.push_back(std::move(row));
  }
  if (line_no == 0) {
    throw Error("csv: missing header");
  }
  return rows;
}

nlohmann::json to_json(const RunSummary& summary) {
  nlohmann::json queues = nlohmann::json::array();
  for (const auto& q : summary.queues) {
    nlohmann::json measured = {{"bandwidth", q.measured.bandwidth}, {"loss", q.measured.loss}};
    measured["delay"] = q.measured.delay ? nlohmann::json(*q.measured.delay) : nlohmann::json();
    queues.push_back(
        {{"at_fraction", q.at_fraction}, {"total_drops", q.total_drops}, {"measured", measured}});
  }
  nlohmann::json j = {{"queues", queues},
                      {"agent_invocations", summary.invocations},
                      {"mean_attempts", summary.mean_attempts}};
  j["convergence_rate"] =
      summary.convergence_rate ? nlohmann::json(*summary.convergence_rate) : nlohmann::json();
  return j;
}

RunSummary summary_from_json(const nlohmann::json& j) {
  RunSummary s;
  for (const auto& q : j.at("queues")) {
    QueueSummary out;
    q.at("at_fraction").get_to(out.at_fraction);
    q.at("total_drops").get_to(out.total_drops);
    const auto& m = q.at("measured");
    m.at("bandwidth").get_to(out.measured.bandwidth);
    m.at("loss").get_to(out.measured.loss);
    if (!m.at("delay").is_null()) out.measured.delay = m.at("delay").get<double>();
    s.queues.push_back(out);
  }
  j.at("agent_invocations").get_to(s.invocations);
  j.at("mean_attempts").get_to(s.mean_attempts);
  if (!j.at("convergence_rate").is_null()) {
    s.convergence_rate = j.at("convergence_rate").get<double>();
  }
  return s;
}

nlohmann::json to_json(const TimeSeriesRow& row) {
  return {{"t", row.t},
          {"occupancy", row.occupancy},
          {"flush_rate", row.flush_rate},
          {"drops", row.drops},
          {"agent_active", row.agent_active},
          {"attempts", row.attempts},
          {"arrivals", row.arrivals},
          {"departures", row.departures}};
}

TimeSeriesRow row_from_json(const nlohmann::json& j) {
  TimeSeriesRow row;
  j.at("t").get_to(row.t);
  j.at("occupancy").get_to(row.occupancy);
  j.at("flush_rate").get_to(row.flush_rate);
  j.at("drops").get_to(row.drops);
  j.at("agent_active").get_to(row.agent_active);
  j.at("attempts").get_to(row.attempts);
  j.at("arrivals").get_to(row.arrivals);
  j.at("departures").get_to(row.departures);
  return row;
}

std::string export_json(std::span<const TimeSeriesRow> series, const RunSummary& summary,
                        const nlohmann::json& config) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : series) {
    rows.push_back(to_json(row));
  }
  const nlohmann::json doc = {{"config", config}, {"series", rows}, {"summary", to_json(summary)}};
  return doc.dump(1) + "\n";
}

}  // namespace sliceq
