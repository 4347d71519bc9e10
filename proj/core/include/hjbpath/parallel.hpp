#pragma once

namespace hjbpath {

/// Sets the worker count for node-parallel loops. Values < 1 restore the
/// runtime default. Results never depend on the thread count.
void set_num_threads(int n);

/// Worker count currently in effect (1 when built without OpenMP).
int num_threads();

}  // namespace hjbpath
