"""Four-agent explanation pipeline over prediction, cost, and profile context.

Agent I summarises prediction reliability, II explains the patient-level
cost balance, III proposes ways to reduce prediction uncertainty, and IV
gives forward-looking guidance. II and III depend on I's response, IV on
II's; the pipeline enforces that order.
"""

from .blocks import (
    AGENT_BLOCKS,
    AGENT_DEPENDENCIES,
    AGENT_QUERIES,
    BLOCK_KINDS,
    AgentContext,
    AgentId,
    build_context,
)
from .clients import (
    ChatClient,
    ClientResponse,
    FaultyClient,
    HttpChatClient,
    MockClient,
)
from .pipeline import AgentExchange, AgentFailure, PipelineResult, run_pipeline
from .templates import DEFAULT_TEMPLATES, TemplateSet, render_prompt

__all__ = [
    "AgentId",
    "AgentContext",
    "AgentExchange",
    "AgentFailure",
    "PipelineResult",
    "AGENT_BLOCKS",
    "AGENT_DEPENDENCIES",
    "AGENT_QUERIES",
    "BLOCK_KINDS",
    "build_context",
    "run_pipeline",
    "render_prompt",
    "TemplateSet",
    "DEFAULT_TEMPLATES",
    "ChatClient",
    "ClientResponse",
    "MockClient",
    "FaultyClient",
    "HttpChatClient",
]
