// GENERATED from routes.json - do not edit by hand.
// Regenerate with: npm run generate
import type { HttpClient, ApiResponse } from "../http.js";

export interface ErrorBody { error?: string; message?: string; field?: string }
export interface CommandAck extends ErrorBody { command_id: string; correlation_id: string }
export interface SagaAck extends CommandAck { saga_id: string }

export const ROUTE_TABLE = [
  {
    "route_id": "register_user",
    "method": "POST",
    "path": "/api/users",
    "kind": "command"
  },
  {
    "route_id": "login",
    "method": "POST",
    "path": "/api/auth/login",
    "kind": "login"
  },
  {
    "route_id": "assign_role",
    "method": "POST",
    "path": "/api/users/{user_id}/roles",
    "kind": "command"
  },
  {
    "route_id": "create_hackathon",
    "method": "POST",
    "path": "/api/hackathons",
    "kind": "command"
  },
  {
    "route_id": "edit_hackathon",
    "method": "PATCH",
    "path": "/api/hackathons/{hackathon_id}",
    "kind": "command"
  },
  {
    "route_id": "add_sponsor",
    "method": "POST",
    "path": "/api/hackathons/{hackathon_id}/sponsors",
    "kind": "command"
  },
  {
    "route_id": "add_award",
    "method": "POST",
    "path": "/api/hackathons/{hackathon_id}/awards",
    "kind": "command"
  },
  {
    "route_id": "transition_hackathon",
    "method": "POST",
    "path": "/api/hackathons/{hackathon_id}/transition",
    "kind": "command"
  },
  {
    "route_id": "register_participant",
    "method": "POST",
    "path": "/api/hackathons/{hackathon_id}/participants",
    "kind": "saga"
  },
  {
    "route_id": "declare_winner",
    "method": "POST",
    "path": "/api/hackathons/{hackathon_id}/winner",
    "kind": "saga"
  },
  {
    "route_id": "create_team",
    "method": "POST",
    "path": "/api/teams",
    "kind": "command"
  },
  {
    "route_id": "join_team",
    "method": "POST",
    "path": "/api/teams/{team_id}/members",
    "kind": "command"
  },
  {
    "route_id": "leave_team",
    "method": "DELETE",
    "path": "/api/teams/{team_id}/members/{participant_id}",
    "kind": "command"
  },
  {
    "route_id": "submit_project",
    "method": "POST",
    "path": "/api/teams/{team_id}/project",
    "kind": "command"
  },
  {
    "route_id": "update_theme",
    "method": "PATCH",
    "path": "/api/pages/{hackathon_id}/theme",
    "kind": "command"
  },
  {
    "route_id": "edit_sections",
    "method": "PATCH",
    "path": "/api/pages/{hackathon_id}/sections",
    "kind": "command"
  },
  {
    "route_id": "publish_page",
    "method": "POST",
    "path": "/api/pages/{hackathon_id}/publish",
    "kind": "command"
  },
  {
    "route_id": "list_hackathons",
    "method": "GET",
    "path": "/api/hackathons",
    "kind": "query"
  },
  {
    "route_id": "get_hackathon",
    "method": "GET",
    "path": "/api/hackathons/{hackathon_id}",
    "kind": "query"
  },
  {
    "route_id": "get_public_page",
    "method": "GET",
    "path": "/api/pages/{hackathon_id}",
    "kind": "query"
  },
  {
    "route_id": "get_roster",
    "method": "GET",
    "path": "/api/teams/{team_id}",
    "kind": "query"
  },
  {
    "route_id": "get_dashboard",
    "method": "GET",
    "path": "/api/me/dashboard",
    "kind": "query"
  },
  {
    "route_id": "get_command",
    "method": "GET",
    "path": "/api/commands/{command_id}",
    "kind": "query"
  },
  {
    "route_id": "get_saga",
    "method": "GET",
    "path": "/api/sagas/{saga_id}",
    "kind": "query"
  }
] as const;

export class ApiClient {
  constructor(private readonly http: HttpClient) {}

  /** POST /api/users (command, public) */
  registerUser(body: Record<string, unknown> = {}): Promise<ApiResponse<CommandAck>> {
    return this.http.request("POST", `/api/users`, body);
  }

  /** POST /api/auth/login (login, public) */
  login(body: Record<string, unknown> = {}): Promise<ApiResponse> {
    return this.http.request("POST", `/api/auth/login`, body);
  }

  /** POST /api/users/{user_id}/roles (command, role: admin) */
  assignRole(user_id: string, body: Record<string, unknown> = {}): Promise<ApiResponse<CommandAck>> {
    return this.http.request("POST", `/api/users/${user_id}/roles`, body);
  }

  /** POST /api/hackathons (command, role: organizer) */
  createHackathon(body: Record<string, unknown> = {}): Promise<ApiResponse<CommandAck>> {
    return this.http.request("POST", `/api/hackathons`, body);
  }

  /** PATCH /api/hackathons/{hackathon_id} (command, role: organizer) */
  editHackathon(hackathon_id: string, body: Record<string, unknown> = {}): Promise<ApiResponse<CommandAck>> {
    return this.http.request("PATCH", `/api/hackathons/${hackathon_id}`, body);
  }

  /** POST /api/hackathons/{hackathon_id}/sponsors (command, role: organizer) */
  addSponsor(hackathon_id: string, body: Record<string, unknown> = {}): Promise<ApiResponse<CommandAck>> {
    return this.http.request("POST", `/api/hackathons/${hackathon_id}/sponsors`, body);
  }

  /** POST /api/hackathons/{hackathon_id}/awards (command, role: organizer) */
  addAward(hackathon_id: string, body: Record<string, unknown> = {}): Promise<ApiResponse<CommandAck>> {
    return this.http.request("POST", `/api/hackathons/${hackathon_id}/awards`, body);
  }

  /** POST /api/hackathons/{hackathon_id}/transition (command, role: organizer) */
  transitionHackathon(hackathon_id: string, body: Record<string, unknown> = {}): Promise<ApiResponse<CommandAck>> {
    return this.http.request("POST", `/api/hackathons/${hackathon_id}/transition`, body);
  }

  /** POST /api/hackathons/{hackathon_id}/participants (saga, role: participant) */
  registerParticipant(hackathon_id: string, body: Record<string, unknown> = {}): Promise<ApiResponse<SagaAck>> {
    return this.http.request("POST", `/api/hackathons/${hackathon_id}/participants`, body);
  }

  /** POST /api/hackathons/{hackathon_id}/winner (saga, role: organizer) */
  declareWinner(hackathon_id: string, body: Record<string, unknown> = {}): Promise<ApiResponse<SagaAck>> {
    return this.http.request("POST", `/api/hackathons/${hackathon_id}/winner`, body);
  }

  /** POST /api/teams (command, role: participant) */
  createTeam(body: Record<string, unknown> = {}): Promise<ApiResponse<CommandAck>> {
    return this.http.request("POST", `/api/teams`, body);
  }

  /** POST /api/teams/{team_id}/members (command, role: participant) */
  joinTeam(team_id: string, body: Record<string, unknown> = {}): Promise<ApiResponse<CommandAck>> {
    return this.http.request("POST", `/api/teams/${team_id}/members`, body);
  }

  /** DELETE /api/teams/{team_id}/members/{participant_id} (command, role: participant) */
  leaveTeam(team_id: string, participant_id: string, body: Record<string, unknown> = {}): Promise<ApiResponse<CommandAck>> {
    return this.http.request("DELETE", `/api/teams/${team_id}/members/${participant_id}`, body);
  }

  /** POST /api/teams/{team_id}/project (command, role: participant) */
  submitProject(team_id: string, body: Record<string, unknown> = {}): Promise<ApiResponse<CommandAck>> {
    return this.http.request("POST", `/api/teams/${team_id}/project`, body);
  }

  /** PATCH /api/pages/{hackathon_id}/theme (command, role: organizer) */
  updateTheme(hackathon_id: string, body: Record<string, unknown> = {}): Promise<ApiResponse<CommandAck>> {
    return this.http.request("PATCH", `/api/pages/${hackathon_id}/theme`, body);
  }

  /** PATCH /api/pages/{hackathon_id}/sections (command, role: organizer) */
  editSections(hackathon_id: string, body: Record<string, unknown> = {}): Promise<ApiResponse<CommandAck>> {
    return this.http.request("PATCH", `/api/pages/${hackathon_id}/sections`, body);
  }

  /** POST /api/pages/{hackathon_id}/publish (command, role: organizer) */
  publishPage(hackathon_id: string, body: Record<string, unknown> = {}): Promise<ApiResponse<CommandAck>> {
    return this.http.request("POST", `/api/pages/${hackathon_id}/publish`, body);
  }

  /** GET /api/hackathons (query, public) */
  listHackathons(query?: { state?: string }): Promise<ApiResponse> {
    const qs = query?.state ? `?state=${encodeURIComponent(query.state)}` : "";
    return this.http.request("GET", `/api/hackathons${qs}`);
  }

  /** GET /api/hackathons/{hackathon_id} (query, public) */
  getHackathon(hackathon_id: string): Promise<ApiResponse> {
    return this.http.request("GET", `/api/hackathons/${hackathon_id}`);
  }

  /** GET /api/pages/{hackathon_id} (query, public) */
  getPublicPage(hackathon_id: string): Promise<ApiResponse> {
    return this.http.request("GET", `/api/pages/${hackathon_id}`);
  }

  /** GET /api/teams/{team_id} (query, role: authenticated) */
  getRoster(team_id: string): Promise<ApiResponse> {
    return this.http.request("GET", `/api/teams/${team_id}`);
  }

  /** GET /api/me/dashboard (query, role: authenticated) */
  getDashboard(): Promise<ApiResponse> {
    return this.http.request("GET", `/api/me/dashboard`);
  }

  /** GET /api/commands/{command_id} (query, role: authenticated) */
  getCommand(command_id: string): Promise<ApiResponse> {
    return this.http.request("GET", `/api/commands/${command_id}`);
  }

  /** GET /api/sagas/{saga_id} (query, role: authenticated) */
  getSaga(saga_id: string): Promise<ApiResponse> {
    return this.http.request("GET", `/api/sagas/${saga_id}`);
  }
}
