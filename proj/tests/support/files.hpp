#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fcase::gen
{

inline std::filesystem::path cases_dir()
{
    return FCASE_CASES_DIR;
}

inline std::string read_file( const std::filesystem::path& path )
{
    std::ifstream in( path, std::ios::binary );
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

inline void write_file( const std::filesystem::path& path, const std::string& text )
{
    std::ofstream out( path, std::ios::binary | std::ios::trunc );
    out << text;
}

inline std::vector< std::filesystem::path > corpus()
{
    std::vector< std::filesystem::path > files;
    for ( const auto& entry : std::filesystem::directory_iterator( cases_dir() ) )
        if ( entry.path().extension() == ".fcase" )
            files.push_back( entry.path() );
    std::sort( files.begin(), files.end() );
    return files;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir( const std::string& name )
{
    const auto dir = std::filesystem::temp_directory_path() / ( "fcase_" + name );
    std::filesystem::remove_all( dir );
    std::filesystem::create_directories( dir );
    return dir;
}

} // namespace fcase::gen
