/*
 * Copyright 2026 The PLO Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PLO_PARALLEL_HPP
#define PLO_PARALLEL_HPP

#include <functional>

namespace plo {

/// Worker cap: PLO_THREADS if set and positive, else hardware concurrency.
int worker_count();

/**
 * Runs fn(i) for i in [0, n) on up to worker_count() threads.
 *
 * Work items must write to disjoint outputs; callers reduce the per-item
 * results in index order so the outcome does not depend on the thread count.
 * The first exception thrown by any item is rethrown after all workers join.
 */
void parallel_for(int n, const std::function<void(int)> &fn);

} // namespace plo

#endif // PLO_PARALLEL_HPP
