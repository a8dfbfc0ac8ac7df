#pragma once

#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace singvoc {

// Static-partition parallel_for over [0, n). Each index is handled by exactly
// one worker and every per-index computation is self-contained, so results are
// bit-identical regardless of the thread count (SINGVOC_THREADS overrides).
class ThreadPool {
public:
    static ThreadPool& instance() {
        static ThreadPool pool;
        return pool;
    }

    int size() const { return static_cast<int>(workers_.size()) + 1; }

    void run(int64_t n, const std::function<void(int64_t, int64_t)>& chunk_fn) {
        if (n <= 0) return;
        const int total = size();
        if (total == 1 || n == 1) {
            chunk_fn(0, n);
            return;
        }
        const int parts = static_cast<int>(std::min<int64_t>(total, n));
        {
            std::unique_lock<std::mutex> lock(mutex_);
            task_ = &chunk_fn;
            task_n_ = n;
            task_parts_ = parts;
            next_part_ = 1;  // part 0 runs on the calling thread
            pending_ = parts - 1;
            ++generation_;
        }
        cv_.notify_all();
        run_part(chunk_fn, n, parts, 0);
        std::unique_lock<std::mutex> lock(mutex_);
        done_cv_.wait(lock, [&] { return pending_ == 0; });
        task_ = nullptr;
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

private:
    ThreadPool() {
        int n = static_cast<int>(std::thread::hardware_concurrency());
        if (const char* env = std::getenv("SINGVOC_THREADS")) {
            int v = std::atoi(env);
            if (v > 0) n = v;
        }
        if (n < 1) n = 1;
        for (int i = 1; i < n; ++i) {
            workers_.emplace_back([this] { worker_loop(); });
        }
    }

    ~ThreadPool() {
        {
            std::unique_lock<std::mutex> lock(mutex_);
            stop_ = true;
            ++generation_;
        }
        cv_.notify_all();
        for (auto& t : workers_) t.join();
    }

    static void run_part(const std::function<void(int64_t, int64_t)>& fn,
                         int64_t n, int parts, int part) {
        const int64_t chunk = (n + parts - 1) / parts;
        const int64_t begin = part * chunk;
        const int64_t end = std::min<int64_t>(n, begin + chunk);
        if (begin < end) fn(begin, end);
    }

    void worker_loop() {
        uint64_t seen = 0;
        while (true) {
            const std::function<void(int64_t, int64_t)>* task = nullptr;
            int64_t n = 0;
            int parts = 0;
            int part = -1;
            {
                std::unique_lock<std::mutex> lock(mutex_);
                cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
                seen = generation_;
                if (stop_) return;
                if (task_ && next_part_ < task_parts_) {
                    task = task_;
                    n = task_n_;
                    parts = task_parts_;
                    part = next_part_++;
                }
            }
            if (part >= 0) {
                run_part(*task, n, parts, part);
                std::unique_lock<std::mutex> lock(mutex_);
                if (--pending_ == 0) done_cv_.notify_all();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(int64_t, int64_t)>* task_ = nullptr;
    int64_t task_n_ = 0;
    int task_parts_ = 0;
    int next_part_ = 0;
    int pending_ = 0;
    uint64_t generation_ = 0;
    bool stop_ = false;
};

template <typename Fn>
void parallel_for(int64_t n, Fn&& fn) {
    std::function<void(int64_t, int64_t)> chunk = [&fn](int64_t b, int64_t e) {
        for (int64_t i = b; i < e; ++i) fn(i);
    };
    ThreadPool::instance().run(n, chunk);
}

// Chunked variant when per-index dispatch overhead matters.
template <typename Fn>
void parallel_chunks(int64_t n, Fn&& fn) {
    std::function<void(int64_t, int64_t)> chunk = [&fn](int64_t b, int64_t e) { fn(b, e); };
    ThreadPool::instance().run(n, chunk);
}

} // namespace singvoc
