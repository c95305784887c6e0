#pragma once

#include <functional>

namespace thermocal {

/// Thread budget: explicit request, else THERMOCAL_THREADS, else hardware cores.
int resolve_threads(int requested);

/// Run task(0..n_tasks-1) on up to `threads` worker threads. Tasks must write
/// only to their own output slots; results are then independent of scheduling.
/// The first exception thrown by a task is rethrown after all workers join.
void parallel_for(int n_tasks, int threads, const std::function<void(int)>& task);

}  // namespace thermocal
