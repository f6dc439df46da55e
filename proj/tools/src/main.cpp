#include "nrt/cli/run.hpp"

int main(int argc, char** argv) { return nrt::cli::main_entry(argc, argv); }
