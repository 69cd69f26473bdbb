#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 numeric error.
int run_cli(int argc, const char* const* argv);
