#include "nltraffic/cli.hpp"

int main(int argc, char** argv) { return nltraffic::run_command(argc, argv); }
