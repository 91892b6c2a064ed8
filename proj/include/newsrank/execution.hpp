#pragma once

namespace newsrank {

// Selects between the OpenMP kernel and its serial reference. Both paths
// derive per-item random streams from the item index, so they return
// identical results for every thread count.
enum class Execution { Serial, Parallel };

} // namespace newsrank
