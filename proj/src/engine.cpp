#include "runsched/engine.hpp"

#include <algorithm>
#include <random>
#include <tuple>

namespace runsched {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::int64_t jitter_draw(std::uint64_t seed, std::string_view task, std::int64_t k, std::int64_t bound) {
  const auto h = fnv1a(task);
  const auto kk = static_cast<std::uint64_t>(k);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h),    static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(kk),   static_cast<std::uint32_t>(kk >> 32)};
  std::mt19937_64 gen(seq);
  // Modulo keeps the value identical across standard libraries, unlike
  // uniform_int_distribution.
  return static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(bound + 1));
}

}  // namespace

std::vector<TimeTick> release_times(const Task& task, TimeTick horizon, std::uint64_t seed) {
  std::vector<TimeTick> out;
  for (std::int64_t k = 0;; ++k) {
    const TimeTick nominal = k * task.period + task.offset;
    if (nominal >= horizon) break;
    const std::int64_t jitter = task.jitter.us > 0 ? jitter_draw(seed, task.id, k, task.jitter.us) : 0;
    out.push_back(nominal + TimeTick{jitter});
    if (task.period.us <= 0) break;
  }
  return out;
}

Scheduler::Scheduler(const Model& model, TimeTick horizon, SegmentHooks* hooks)
    : model_(model), horizon_(horizon), hooks_(hooks) {
  const auto n = model.tasks.size();
  task_runnables_.resize(n);
  releases_.resize(n);
  predecessors_.resize(n);
  completed_.assign(n, 0);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& task = model.tasks[t];
    for (const auto& r : task.runnables) task_runnables_[t].push_back(*model.runnable_index(r));
    for (const auto& p : task.prect) predecessors_[t].push_back(*model.task_index(p));
    releases_[t] = release_times(task, horizon, model.sim.seed);
    trace_.tasks.push_back({task.id, task.period, task.priority, task.runnables});
  }
  trace_.horizon = horizon;

  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t k = 0; k < releases_[t].size(); ++k) pending_.push_back({releases_[t][k], t, k});
  std::sort(pending_.begin(), pending_.end(), [](const PendingRelease& a, const PendingRelease& b) {
    return std::tie(a.time, a.task, a.index) < std::tie(b.time, b.task, b.index);
  });

  // fit checks look past the horizon
  sorted_releases_.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& task = model.tasks[t];
    sorted_releases_[t] = release_times(task, horizon + task.period + task.jitter + TimeTick{1}, model.sim.seed);
    std::sort(sorted_releases_[t].begin(), sorted_releases_[t].end());
  }
}

void Scheduler::emit(EventKind kind, const Job* job, std::string runnable) {
  TraceEvent e;
  e.time = now_;
  e.kind = kind;
  if (job) {
    e.task = model_.tasks[job->task].id;
    e.release_index = job->index;
  }
  e.runnable = std::move(runnable);
  trace_.events.push_back(std::move(e));
}

bool Scheduler::eligible(const Job& job) const {
  for (auto p : predecessors_[job.task])
    if (completed_[p] < job.index + 1) return false;
  return true;
}

TimeTick Scheduler::next_higher_release(int priority, TimeTick now) const {
  TimeTick earliest = kNever;
  for (std::size_t t = 0; t < model_.tasks.size(); ++t) {
    if (model_.tasks[t].priority <= priority) continue;
    const auto& r = sorted_releases_[t];
    auto it = std::upper_bound(r.begin(), r.end(), now);
    if (it != r.end()) earliest = std::min(earliest, *it);
  }
  return earliest;
}

bool Scheduler::fits_before_higher_release(const Job& job, TimeTick now) const {
  if (job.cursor >= job.remaining.size()) return false;
  const TimeTick limit = next_higher_release(model_.tasks[job.task].priority, now);
  return limit == kNever || now + job.remaining[job.cursor] <= limit;
}

std::vector<std::size_t> Scheduler::ready_queue() const {
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < jobs_.size(); ++i)
    if (jobs_[i].state == JobState::Ready) queue.push_back(i);
  std::sort(queue.begin(), queue.end(), [&](std::size_t a, std::size_t b) {
    const auto& ja = jobs_[a];
    const auto& jb = jobs_[b];
    const int pa = model_.tasks[ja.task].priority;
    const int pb = model_.tasks[jb.task].priority;
    return std::make_tuple(-pa, ja.release, ja.task, ja.index) < std::make_tuple(-pb, jb.release, jb.task, jb.index);
  });
  return queue;
}

std::optional<TimeTick> Scheduler::next_instant() const {
  TimeTick next = kNever;
  if (running_) next = std::min(next, running_->end);
  if (next_pending_ < pending_.size()) next = std::min(next, pending_[next_pending_].time);
  for (const auto& j : jobs_)
    if (j.state != JobState::Finished && !j.missed && j.deadline > now_) next = std::min(next, j.deadline);
  if (next == kNever || next > horizon_) return std::nullopt;
  return next;
}

void Scheduler::complete_segment() {
  if (!running_ || running_->end != now_) return;
  const auto seg = *running_;
  running_.reset();
  Job& job = jobs_[seg.job];
  if (hooks_) hooks_->on_segment_end(seg.runnable, now_);
  emit(EventKind::Finish, &job, model_.runnables[seg.runnable].id);
  job.remaining[job.cursor] = TimeTick{0};
  ++job.cursor;
  if (job.cursor == job.remaining.size()) {
    job.state = JobState::Finished;
    job.finish = now_;
    ++completed_[job.task];
    emit(EventKind::Finish, &job);
  } else {
    job.state = JobState::Ready;
  }
}

void Scheduler::check_deadlines() {
  for (auto& j : jobs_) {
    if (j.state == JobState::Finished || j.missed || j.deadline > now_) continue;
    j.missed = true;
    emit(EventKind::DeadlineMiss, &j);
  }
}

void Scheduler::release_jobs() {
  while (next_pending_ < pending_.size() && pending_[next_pending_].time == now_) {
    const auto& p = pending_[next_pending_++];
    Job job;
    job.task = p.task;
    job.index = static_cast<std::int64_t>(p.index);
    job.release = p.time;
    job.deadline = p.time + model_.tasks[p.task].period;
    for (auto r : task_runnables_[p.task]) job.remaining.push_back(model_.runnables[r].budget);
    jobs_.push_back(std::move(job));
    emit(EventKind::Release, &jobs_.back());
  }
}

void Scheduler::dispatch() {
  if (running_ || now_ >= horizon_) return;
  const auto queue = ready_queue();

  // The first eligible job decides: if its next runnable cannot finish before
  // a higher-priority release, nothing lower is started in its place.
  std::optional<std::size_t> pick;
  for (auto idx : queue) {
    if (!eligible(jobs_[idx])) continue;
    if (fits_before_higher_release(jobs_[idx], now_)) pick = idx;
    break;
  }

  if (pick && idle_) {
    emit(EventKind::IdleEnd, nullptr);
    idle_ = false;
  }
  for (auto idx : queue) {
    Job& j = jobs_[idx];
    if (idx == pick || j.cursor == 0 || j.displaced) continue;
    j.displaced = true;
    emit(EventKind::Preempt, &j);
  }
  if (!pick) {
    if (!idle_) {
      emit(EventKind::IdleStart, nullptr);
      idle_ = true;
    }
    return;
  }

  Job& job = jobs_[*pick];
  if (job.displaced) {
    job.displaced = false;
    emit(EventKind::Resume, &job);
  }
  job.state = JobState::Running;
  const auto runnable = task_runnables_[job.task][job.cursor];
  running_ = RunningSegment{*pick, runnable, now_, now_ + job.remaining[job.cursor]};
  emit(EventKind::Start, &job, model_.runnables[runnable].id);
  if (hooks_) hooks_->on_segment_start(runnable, now_);
}

void Scheduler::step() {
  if (done_) return;
  if (!started_) {
    started_ = true;
    now_ = TimeTick{0};
  } else {
    auto next = next_instant();
    if (!next) {
      if (idle_) {
        now_ = horizon_;
        emit(EventKind::IdleEnd, nullptr);
        idle_ = false;
      }
      done_ = true;
      return;
    }
    now_ = *next;
  }
  complete_segment();
  check_deadlines();
  release_jobs();
  dispatch();
}

Trace Scheduler::run() {
  while (!done_) step();
  auto rank_of = [&](const TraceEvent& e) -> std::size_t {
    if (e.task.empty()) return 0;
    return *model_.task_index(e.task) + 1;
  };
  std::stable_sort(trace_.events.begin(), trace_.events.end(), [&](const TraceEvent& a, const TraceEvent& b) {
    return std::make_tuple(a.time, event_kind_rank(a.kind), rank_of(a)) <
           std::make_tuple(b.time, event_kind_rank(b.kind), rank_of(b));
  });
  return trace_;
}

Trace simulate(const Model& model, TimeTick horizon, SegmentHooks* hooks) {
  require_valid(model);
  Scheduler scheduler(model, horizon, hooks);
  return scheduler.run();
}

}  // namespace runsched
