#include "conflict_radar/codec.hpp"
#include "conflict_radar/detect.hpp"
#include "conflict_radar/distill.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace conflict_radar;

namespace {

py::object to_py(const Json &doc)
{
    return py::module_::import("json").attr("loads")(doc.dump());
}

Json from_py(const py::handle &obj)
{
    return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

ChangeSet change_set(const py::handle &obj)
{
    return decode_change_set(from_py(obj));
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Semantic change extraction and conflict detection for Java sources";

    py::exception<SyntaxError>(m, "JavaSyntaxError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const SyntaxError &e) {
            py::object type = py::module_::import("conflict_radar._core").attr("JavaSyntaxError");
            py::object value = type(e.what());
            value.attr("line") = e.span().startLine;
            value.attr("column") = e.span().startCol;
            value.attr("offset") = e.span().startByte;
            PyErr_SetObject(type.ptr(), value.ptr());
        } catch (const MismatchedFile &e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const DecodeError &e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def(
        "parse",
        [](const std::string &source, const std::string &filePath) { return to_py(encode(parse_unit(source, filePath))); },
        py::arg("source"), py::arg("file_path"), "Declaration tree of a Java source file.");

    m.def(
        "diff",
        [](const std::string &before, const std::string &after, const std::string &filePath, const std::string &project,
           const std::string &author, std::uint64_t baseRevision, std::uint64_t firstSeq, std::int64_t atMillis) {
            ExtractOptions opts{project, author, RevisionStamp{baseRevision}, firstSeq, atMillis};
            return to_py(encode(extract_changes(parse_unit(before, filePath), parse_unit(after, filePath), opts)));
        },
        py::arg("before"), py::arg("after"), py::arg("file_path"), py::arg("project") = "", py::arg("author") = "",
        py::arg("base_revision") = 0, py::arg("first_seq") = 1, py::arg("at_millis") = 0,
        "Semantic changes between two versions of one file, as a change set.");

    m.def(
        "consolidate", [](const py::object &set) { return to_py(encode(consolidate(change_set(set)))); },
        py::arg("change_set"));

    m.def(
        "detect",
        [](const py::object &local, const py::list &remotes, bool suppressIdentical) {
            const ChangeSet mine = change_set(local);
            std::vector<ChangeSet> theirs;
            std::vector<RenameAlias> aliases = rename_aliases(mine);
            for (const py::handle r : remotes) {
                theirs.push_back(change_set(r));
                const auto more = rename_aliases(theirs.back());
                aliases.insert(aliases.end(), more.begin(), more.end());
            }
            DetectOptions opts;
            opts.suppressIdentical = suppressIdentical;
            return to_py(encode(detect(mine, theirs, aliases, opts)));
        },
        py::arg("local"), py::arg("remotes"), py::arg("suppress_identical") = false,
        "Conflict reports for the local change set against the remote ones.");

    m.def(
        "version_gate",
        [](const py::object &set, std::uint64_t localBase) {
            return version_gate(change_set(set), RevisionStamp{localBase}) == GateDecision::Accepted;
        },
        py::arg("change_set"), py::arg("local_base"), "True when the set may be applied on top of local_base.");

    m.def(
        "purge_on_revert",
        [](const py::object &set, const std::string &filePath) {
            return to_py(encode(purge_on_revert(change_set(set), filePath)));
        },
        py::arg("change_set"), py::arg("file_path"));

    m.def(
        "render_path_id",
        [](const py::object &path) { return render_path_id(decode_path(from_py(path))); },
        py::arg("path"));

    m.def("change_kinds", [] {
        std::vector<std::string> out;
        for (const ChangeKind k : all_change_kinds()) {
            out.emplace_back(to_string(k));
        }
        return out;
    });
    m.attr("TAXONOMY_KIND_COUNT") = kTaxonomyKindCount;
}
