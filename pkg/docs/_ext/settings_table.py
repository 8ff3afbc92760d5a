"""Sphinx extension to generate a default settings table from relbox.settings.Settings."""

from __future__ import annotations

from docutils import nodes
from docutils.parsers.rst import Directive
from sphinx.application import Sphinx

SECTIONS = {
    "Geometry": ["speed_of_light", "alice_location", "bob_location"],
    "Engine": ["emission_delay", "event_budget", "enumeration_limit", "poset_limit"],
    "Estimation": ["confidence", "interval", "workers"],
}


def format_default(default: object) -> str:
    if default is None:
        return "None"
    if isinstance(default, str):
        return f'"{default}"'
    return repr(default)


def entry(node: nodes.Node) -> nodes.entry:
    cell = nodes.entry()
    cell += node
    return cell


class SettingsTableDirective(Directive):
    """Generate one table per settings section with default values and descriptions."""

    has_content = False
    required_arguments = 0
    optional_arguments = 0

    def run(self) -> list[nodes.Node]:
        """Build the settings tables from the Settings model."""
        from relbox.settings import Settings

        result_nodes = []
        for section_title, field_names in SECTIONS.items():
            section = nodes.section(ids=[nodes.make_id(f"settings-{section_title}")])
            section += nodes.title(text=section_title)

            table = nodes.table()
            tgroup = nodes.tgroup(cols=3)
            table += tgroup
            for width in (25, 25, 50):
                tgroup += nodes.colspec(colwidth=width)

            thead = nodes.thead()
            tgroup += thead
            header_row = nodes.row()
            thead += header_row
            for header_text in ("Setting", "Default", "Description"):
                header_row += entry(nodes.paragraph(text=header_text))

            tbody = nodes.tbody()
            tgroup += tbody
            for field_name in field_names:
                field_info = Settings.model_fields.get(field_name)
                if field_info is None:
                    continue
                first_line = (field_info.description or "").strip().split("\n")[0].strip()
                row = nodes.row()
                row += entry(nodes.literal(text=field_name))
                row += entry(nodes.literal(text=format_default(field_info.default)))
                row += entry(nodes.paragraph(text=first_line))
                tbody += row

            section += table
            result_nodes.append(section)

        return result_nodes


def setup(app: Sphinx) -> dict:
    """Register the directive."""
    app.add_directive("settings-table", SettingsTableDirective)
    return {"version": "1.0", "parallel_read_safe": True}
