"""Shipped prompt templates and the response schemas their outputs must obey.

Template texts are editable deployment data; the pipeline depends only on
template ids, slot names, and schema ids.
"""

from __future__ import annotations

import string
from dataclasses import dataclass


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    text: str
    response_schema_id: str

    def slot_names(self) -> set[str]:
        return {name for _, name, _, _ in string.Formatter().parse(self.text) if name}


_ID = {"type": ["integer", "string"]}

RESPONSE_SCHEMAS: dict[str, dict] = {
    "caption": {
        "type": "object",
        "required": ["kind", "text"],
        "properties": {
            "kind": {"enum": ["CHANGE", "CONTINUOUS"]},
            "text": {"type": "string"},
        },
    },
    "chapter_list": {
        "type": "object",
        "required": ["chapters"],
        "properties": {
            "chapters": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "required": ["t_s", "t_e"],
                    "properties": {
                        "t_s": {"type": "number"},
                        "t_e": {"type": "number"},
                        "title": {"type": "string"},
                    },
                },
            }
        },
    },
    "step_list": {
        "type": "object",
        "required": ["steps"],
        "properties": {
            "steps": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "required": ["t_s", "t_e"],
                    "properties": {
                        "t_s": {"type": "number"},
                        "t_e": {"type": "number"},
                    },
                },
            }
        },
    },
    "relation_list": {
        "type": "object",
        "required": ["relations"],
        "properties": {
            "relations": {
                "type": "array",
                "items": {
                    "oneOf": [
                        {
                            "type": "object",
                            "required": ["kind", "from", "to"],
                            "properties": {
                                "kind": {"const": "SEQUENTIAL"},
                                "from": _ID,
                                "to": _ID,
                            },
                        },
                        {
                            "type": "object",
                            "required": ["kind", "members"],
                            "properties": {
                                "kind": {"const": "PARALLEL"},
                                "members": {"type": "array", "minItems": 2, "items": _ID},
                            },
                        },
                    ]
                },
            }
        },
    },
    "chapter_summary": {
        "type": "object",
        "required": ["summary"],
        "properties": {"summary": {"type": "string", "minLength": 1}},
    },
    "step_summary": {
        "type": "object",
        "required": ["concise", "verbose"],
        "properties": {
            "concise": {"type": "string", "minLength": 1},
            "verbose": {"type": "string", "minLength": 1},
            "emoji": {"type": "string"},
            "key_spans": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["target", "text", "kind"],
                    "properties": {
                        "target": {"enum": ["CONCISE", "VERBOSE"]},
                        "text": {"type": "string", "minLength": 1},
                        "kind": {"enum": ["TIP", "WARNING", "QUANTITY"]},
                    },
                },
            },
        },
    },
    "subtask_plan": {
        "type": "object",
        "required": ["subtasks"],
        "properties": {
            "subtasks": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["kind"],
                    "properties": {
                        "kind": {"type": "string"},
                        "instructions": {"type": "string"},
                    },
                },
            }
        },
    },
    "detection": {
        "type": "object",
        "required": ["positive"],
        "properties": {
            "positive": {"type": "boolean"},
            "ocr_text": {"type": "string"},
            "explanation": {"type": "string"},
        },
    },
}


_TEMPLATE_LIST = [
    PromptTemplate(
        "frame_caption",
        "Compare the current frame with the previous one and judge whether anything "
        "changed between them. If there are changes, describe the changes; otherwise "
        "state that the current frame is continuous with the previous one. For the "
        "first frame describe what it shows. Nearby narration for context:\n{context}",
        "caption",
    ),
    PromptTemplate(
        "chapter_cluster",
        "Cluster all frame indices into multiple frame index sets (chapters), each "
        "with a start and end time stamp, based on the input frame captions and the "
        "speech transcript. The video is {duration} seconds long. Chapters must cover "
        "the video in order.\n\nFrame captions:\n{captions}\n\nTranscript:\n{transcript}",
        "chapter_list",
    ),
    PromptTemplate(
        "step_extract",
        "Summarize the chapter content into key steps with time stamps. The chapter "
        "(id {chapter_id}) spans {t_s} to {t_e} seconds. Emit at least one step, each "
        "with start and end times inside the chapter.\n\nChapter content:\n{content}",
        "step_list",
    ),
    PromptTemplate(
        "relation_classify",
        "Identify the logical relation between the listed {level} elements based on "
        "their content, and categorize each relation as sequential or parallel and "
        "alternative. Sequential means one element must precede another; parallel or "
        "alternative elements can be performed in any order.\n\nElements:\n{elements}"
        "\n\nContent:\n{content}",
        "relation_list",
    ),
    PromptTemplate(
        "chapter_summary",
        "Write a concise, high-level summarization of this chapter encapsulated "
        "within a single sentence.\n\nChapter content:\n{content}",
        "chapter_summary",
    ),
    PromptTemplate(
        "step_summary",
        "Summarize a detailed instructional step with some explanations and examples "
        "within three sentences and suggest a suitable emoji (verbose form), and also "
        "summarize a concise instructional step within one sentence (concise form). "
        "Identify the key information (such as tips and warnings) within the input "
        "and mark those spans so they can be highlighted in the summarized step.\n\n"
        "Step transcript:\n{transcript}\n\nOn-screen text found in this step:\n"
        "{ocr_text}\n\nDiagram explanations found in this step:\n{diagrams}",
        "step_summary",
    ),
    PromptTemplate(
        "static_plan",
        "You are a planner. Given the query task below, decompose it into high-level "
        "sub-tasks for detecting creator-added visual emphasis in video frames. The "
        "executor will run your sub-tasks one frame at a time.\n\nQuery: {query}",
        "subtask_plan",
    ),
    PromptTemplate(
        "detect_text_overlay",
        "Determine whether the image contains text overlays added by the creator. "
        "If so, output the topic-related OCR results, filtering out incidental text. "
        "Narration near this frame:\n{transcript_window}",
        "detection",
    ),
    PromptTemplate(
        "detect_diagram",
        "Determine whether the image contains graphic or diagram annotations. If so, "
        "explain them using the related content. Narration near this frame:\n"
        "{transcript_window}",
        "detection",
    ),
    PromptTemplate(
        "detect_special_mark",
        "Determine whether the image contains special marks such as circles, arrows, "
        "or lines that highlight specific elements. Output only results that are not "
        "duplicated with the previous detection results listed here:\n{prior}\n"
        "Narration near this frame:\n{transcript_window}",
        "detection",
    ),
]

TEMPLATES: dict[str, PromptTemplate] = {t.template_id: t for t in _TEMPLATE_LIST}

STATIC_SUBTASK_ORDER = ("TEXT_OVERLAY", "DIAGRAM", "SPECIAL_MARK")

SUBTASK_TEMPLATE_IDS = {
    "TEXT_OVERLAY": "detect_text_overlay",
    "DIAGRAM": "detect_diagram",
    "SPECIAL_MARK": "detect_special_mark",
}
