#include "steinflow/harness.hpp"

int main(int argc, char** argv) { return steinflow::cli_main(argc, argv); }
