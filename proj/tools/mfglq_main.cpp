#include "mfglq/cli.hpp"

int main(int argc, char** argv) { return mfglq::run_cli(argc, argv); }
