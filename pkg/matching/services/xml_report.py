# matching/services/xml_report.py
"""
XML form of similarity reports, the hand-off format between matching and
clustering:

    <SimilarityReports>
    <Request id="r1"><Class><CID>7</CID><CWeight>1.0000</CWeight></Class>...</Request>
    </SimilarityReports>
"""

import xml.etree.ElementTree as ET
from collections.abc import Iterable

from matching.exceptions import ReportFormatError
from matching.models import SimilarityReport

XML_DECLARATION = '<?xml version="1.0" encoding="UTF-8"?>\n'


def _weight(value: float) -> str:
    return f"{value:.4f}"


def emit_similarity_xml(reports: SimilarityReport | Iterable[SimilarityReport]) -> str:
    if isinstance(reports, SimilarityReport):
        reports = [reports]

    root = ET.Element("SimilarityReports")
    for report in reports:
        request = ET.SubElement(root, "Request", {"id": report.request_id})
        for class_id, score in report.class_scores:
            entry = ET.SubElement(request, "Class")
            ET.SubElement(entry, "CID").text = class_id
            ET.SubElement(entry, "CWeight").text = _weight(score)
        for attr_id, score in report.attribute_scores:
            entry = ET.SubElement(request, "Attribute")
            ET.SubElement(entry, "AID").text = attr_id
            ET.SubElement(entry, "AWeight").text = _weight(score)
        request.tail = "\n"

    if len(root):
        root.text = "\n"
    return XML_DECLARATION + ET.tostring(root, encoding="unicode") + "\n"


def _float(element: ET.Element, tag: str, request_id: str) -> float:
    child = element.find(tag)
    if child is None or child.text is None:
        raise ReportFormatError(f"Request {request_id}: missing <{tag}>")
    try:
        return float(child.text)
    except ValueError:
        raise ReportFormatError(f"Request {request_id}: <{tag}> is not a number")


def _text(element: ET.Element, tag: str, request_id: str) -> str:
    child = element.find(tag)
    if child is None or not child.text:
        raise ReportFormatError(f"Request {request_id}: missing <{tag}>")
    return child.text


def parse_similarity_xml(text: str) -> list[SimilarityReport]:
    """Read reports back; weights carry the 4-decimal printing precision."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, _column = exc.position
        raise ReportFormatError(f"Invalid XML at line {line}: {exc}") from exc

    reports = []
    for request in root.findall("Request"):
        request_id = request.get("id", "")
        classes = tuple(
            (_text(e, "CID", request_id), _float(e, "CWeight", request_id))
            for e in request.findall("Class")
        )
        attributes = tuple(
            (_text(e, "AID", request_id), _float(e, "AWeight", request_id))
            for e in request.findall("Attribute")
        )
        reports.append(
            SimilarityReport(
                request_id=request_id, class_scores=classes, attribute_scores=attributes
            )
        )
    return reports
