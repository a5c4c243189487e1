#include "subflow/cli.hpp"

int main(int argc, char** argv) { return subflow::cli::subflow_main(argc, argv); }
