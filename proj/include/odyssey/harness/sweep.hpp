#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "odyssey/harness/experiment.hpp"

namespace odyssey {

// One sweep axis: a config key and the values it takes.
using SweepGrid = std::vector<std::pair<std::string, std::vector<std::string>>>;

inline std::size_t grid_cell_count(const SweepGrid& grid) {
  std::size_t n = 1;
  for (const auto& [key, values] : grid) {
    if (values.empty()) throw ConfigError("sweep: empty grid dimension '" + key + "'");
    n *= values.size();
  }
  return n;
}

// Cell index -> overrides, row-major with the first grid key outermost.
inline std::vector<std::pair<std::string, std::string>> grid_cell(const SweepGrid& grid,
                                                                  std::size_t cell) {
  std::vector<std::pair<std::string, std::string>> overrides;
  std::size_t stride = grid_cell_count(grid);
  std::size_t rest = cell;
  for (const auto& [key, values] : grid) {
    stride /= values.size();
    overrides.emplace_back(key, values[rest / stride]);
    rest %= stride;
  }
  return overrides;
}

// Crash-safe incremental writer. Rows append to <path>.partial as
// "row <cell> <task> <csv>" lines with a "done <cell>" marker per finished
// cell; finalize() sorts completed cells into the final CSV (atomic rename)
// and removes the partial file. An interrupted run resumes by skipping cells
// already marked done.
class IncrementalCsvWriter {
 public:
  explicit IncrementalCsvWriter(std::string path) : path_(std::move(path)) {
    partial_path_ = path_ + ".partial";
    if (std::filesystem::exists(partial_path_)) {
      std::ifstream in(partial_path_);
      std::string line;
      while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "done") {
          std::size_t cell;
          if (ls >> cell) done_.insert(cell);
        } else if (tag == "row") {
          std::size_t cell, task;
          if (ls >> cell >> task) {
            std::string rest;
            std::getline(ls, rest);
            if (!rest.empty() && rest.front() == ' ') rest.erase(rest.begin());
            rows_[{cell, task}] = rest;
          }
        }
      }
    }
    out_.open(partial_path_, std::ios::app);
    if (!out_) throw ConfigError("cannot open '" + partial_path_ + "' for writing");
  }

  bool cell_done(std::size_t cell) const { return done_.count(cell) > 0; }

  void add_row(std::size_t cell, std::size_t task, const std::string& csv) {
    std::lock_guard<std::mutex> lock(mutex_);
    rows_[{cell, task}] = csv;
    out_ << "row " << cell << " " << task << " " << csv << "\n";
    out_.flush();
  }

  void mark_done(std::size_t cell) {
    std::lock_guard<std::mutex> lock(mutex_);
    done_.insert(cell);
    out_ << "done " << cell << "\n";
    out_.flush();
  }

  // Writes header + rows of done cells in (cell, task) order.
  void finalize(const std::string& header) {
    out_.close();
    std::string tmp = path_ + ".tmp";
    {
      std::ofstream f(tmp);
      if (!f) throw ConfigError("cannot write '" + tmp + "'");
      f << header << "\n";
      for (const auto& [key, csv] : rows_)
        if (done_.count(key.first)) f << csv << "\n";
    }
    std::filesystem::rename(tmp, path_);
    std::filesystem::remove(partial_path_);
  }

 private:
  std::string path_;
  std::string partial_path_;
  std::ofstream out_;
  std::map<std::pair<std::size_t, std::size_t>, std::string> rows_;
  std::set<std::size_t> done_;
  std::mutex mutex_;
};

inline void ensure_parent_dir(const std::string& path) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

// Runs the Cartesian product of the grid over the base config on one worker
// pool spanning every pending (cell, row) pair. Cells are independent; each
// row uses only its keyed RNG streams, so the final CSV is identical for any
// worker count.
inline void run_sweep(const ExperimentConfig& base, const SweepGrid& grid,
                      const std::string& out_csv, int threads = 0) {
  const std::size_t cells = grid_cell_count(grid);
  ensure_parent_dir(out_csv);
  IncrementalCsvWriter writer(out_csv);

  struct Cell {
    std::size_t index = 0;
    ExperimentConfig cfg;
    ExperimentEnv env;
    std::atomic<int> remaining{0};
  };
  struct Task {
    Cell* cell;
    std::size_t row;
    int ctx_idx, img_idx, rep;
  };
  std::vector<std::unique_ptr<Cell>> pending;
  std::vector<Task> tasks;

  for (std::size_t cell = 0; cell < cells; ++cell) {
    if (writer.cell_done(cell)) continue;
    auto c = std::make_unique<Cell>();
    c->index = cell;
    c->cfg = base;
    for (const auto& [key, value] : grid_cell(grid, cell)) apply_config_value(c->cfg, key, value);
    c->cfg.validate();
    c->env = build_env(c->cfg);
    std::size_t row = 0;
    for (int ctx = 0; ctx < static_cast<int>(c->env.context_ids.size()); ++ctx)
      for (int img = 0; img < c->cfg.images_per_context; ++img)
        for (int rep = 0; rep < c->cfg.repeats; ++rep)
          tasks.push_back({c.get(), row++, ctx, img, rep});
    c->remaining.store(static_cast<int>(row));
    pending.push_back(std::move(c));
  }

  if (threads <= 0) threads = worker_pool_size();
  threads = std::min<int>(threads, std::max<int>(1, static_cast<int>(tasks.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      ResultRow row = run_single(t.cell->cfg, t.cell->env, t.ctx_idx, t.img_idx, t.rep);
      writer.add_row(t.cell->index, t.row, to_csv(row));
      if (t.cell->remaining.fetch_sub(1) == 1) writer.mark_done(t.cell->index);
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  writer.finalize(result_csv_header());
}

// Single-config run with the same crash-safe incremental output.
inline std::vector<ResultRow> run_to_csv(const ExperimentConfig& cfg, const std::string& out_csv,
                                         int threads = 0) {
  ensure_parent_dir(out_csv);
  IncrementalCsvWriter writer(out_csv);
  std::vector<ResultRow> rows;
  if (!writer.cell_done(0)) {
    rows = run_experiment(cfg, [&](std::size_t task, const ResultRow& row) {
      writer.add_row(0, task, to_csv(row));
    }, threads);
    writer.mark_done(0);
  }
  writer.finalize(result_csv_header());
  return rows;
}

}  // namespace odyssey
