#include <leadnet/cli.hpp>

int main(int argc, char** argv)
{
    return leadnet::cli::cli_main(argc, argv);
}
